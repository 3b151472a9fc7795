#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "scwdr/commands.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"scwdr"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = scwdr::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("scwdr_cli_" + std::to_string(::getpid()) + "_" + std::to_string(++counter));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int exit_status(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("phase-scan writes a normalized table") {
  TempDir dir;
  const auto r = cli({"phase-scan", "--out", dir.str(), "--set", "detector.gamma=100"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("visibility") != std::string::npos);
  const auto rows = read_csv(dir.path() / "phase_scan.csv");
  REQUIRE(rows.size() == 74);
  CHECK(rows[0] == std::vector<std::string>{"delta_phi_rad", "rate_h_norm", "rate_v_norm"});
  CHECK(rows[1][0] == "0");
  CHECK(rows[1][1] == "1");
  CHECK(rows[37][2] == "1");
}

TEST_CASE("json output carries the same data as csv") {
  TempDir csv_dir;
  TempDir json_dir;
  REQUIRE(cli({"phase-scan", "--out", csv_dir.str()}).code == 0);
  REQUIRE(cli({"phase-scan", "--out", json_dir.str(), "--format", "json"}).code == 0);
  const auto rows = read_csv(csv_dir.path() / "phase_scan.csv");
  const auto j = nlohmann::json::parse(slurp(json_dir.path() / "phase_scan.json"));
  REQUIRE(j.size() + 1 == rows.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
      CHECK(j[i][rows[0][c]].get<double>() == std::stod(rows[i + 1][c]));
    }
  }
}

TEST_CASE("visibility with one modulation depth gives one row") {
  TempDir dir;
  REQUIRE(cli({"visibility", "--out", dir.str(), "--set", "scan.betas=0.4", "--set", "scan.points=72"}).code == 0);
  const auto rows = read_csv(dir.path() / "visibility.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"beta", "visibility"});
  CHECK(std::stod(rows[1][1]) > 0.89);
}

TEST_CASE("visibility without dark counts and higher orders beats the plateau") {
  TempDir dir;
  REQUIRE(cli({"visibility", "--out", dir.str(), "--set", "scan.betas=0.4", "--set", "detector.gamma=0", "--set",
               "scan.sidebands=first"})
              .code == 0);
  TempDir plain;
  REQUIRE(cli({"visibility", "--out", plain.str(), "--set", "scan.betas=0.4", "--set", "detector.gamma=100"}).code ==
          0);
  CHECK(std::stod(read_csv(dir.path() / "visibility.csv")[1][1]) >
        std::stod(read_csv(plain.path() / "visibility.csv")[1][1]));
}

TEST_CASE("tomography is byte-identical for a fixed seed") {
  TempDir a;
  TempDir b;
  TempDir c;
  REQUIRE(cli({"tomography", "--out", a.str(), "--seed", "11"}).code == 0);
  REQUIRE(cli({"tomography", "--out", b.str(), "--seed", "11"}).code == 0);
  REQUIRE(cli({"tomography", "--out", c.str(), "--seed", "12"}).code == 0);
  for (const char* name : {"rho_H.json", "rho_V.json", "rho_D.json", "rho_A.json", "records_D.csv",
                           "tomography_fidelity.csv"}) {
    CHECK(slurp(a.path() / name) == slurp(b.path() / name));
  }
  CHECK(slurp(a.path() / "records_D.csv") != slurp(c.path() / "records_D.csv"));
  const auto rows = read_csv(a.path() / "tomography_fidelity.csv");
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][2]) >= 0.95);
}

TEST_CASE("tomography reconstructs a records file") {
  TempDir sim;
  REQUIRE(cli({"tomography", "--out", sim.str()}).code == 0);
  TempDir out;
  const auto r = cli({"tomography", "--out", out.str(), "--records", (sim.path() / "records_H.csv").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(out.path() / "rho_measured.json"));
  CHECK(j["re"][0][0].get<double>() > 0.95);

  std::ofstream(out.path() / "bad.csv") << "projector,counts,duration_s\nQ,1,1\n";
  CHECK(cli({"tomography", "--out", out.str(), "--records", (out.path() / "bad.csv").string()}).code == 2);
}

TEST_CASE("keyrate at fixed parameters") {
  TempDir dir;
  REQUIRE(cli({"keyrate", "--out", dir.str(), "--scheme", "traditional"}).code == 0);
  const auto rows = read_csv(dir.path() / "keyrate.csv");
  CHECK(rows[0] == std::vector<std::string>{"loss_db", "eta", "scheme", "alpha0", "beta", "K_bits_per_s", "Q", "P_B",
                                            "chi"});
  REQUIRE(rows.size() == 14);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][2] == "traditional");
    CHECK(std::stod(rows[i][5]) >= 0.0);
  }
}

TEST_CASE("optimize sweep through a config file") {
  TempDir dir;
  const fs::path conf = dir.path() / "run.conf";
  std::ofstream(conf) << "keyrate.losses_db = 0, 10, 30\noutput.format = json\n";
  const auto r = cli({"optimize", "--config", conf.string(), "--out", dir.str()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir.path() / "optimize.json"));
  REQUIRE(j.size() == 6);
  CHECK(j[0]["scheme"] == "traditional");
  CHECK(j[3]["scheme"] == "discriminator");
  CHECK(j[0]["below_cutoff"] == 0);
  CHECK(j[0]["K_bits_per_s"].get<double>() > j[1]["K_bits_per_s"].get<double>());
  CHECK(j[0].contains("alpha0_opt"));
  CHECK(j[0].contains("beta_opt"));

  TempDir again;
  REQUIRE(cli({"optimize", "--config", conf.string(), "--out", again.str()}).code == 0);
  CHECK(slurp(dir.path() / "optimize.json") == slurp(again.path() / "optimize.json"));
}

TEST_CASE("usage and configuration errors exit with 2") {
  TempDir dir;
  CHECK(cli({}).code == 2);
  CHECK(cli({"plot"}).code == 2);
  CHECK(cli({"phase-scan", "--out", dir.str(), "--format", "xml"}).code == 2);
  CHECK(cli({"phase-scan", "--out", dir.str(), "--set", "scan.phis="}).code == 2);
  CHECK(cli({"phase-scan", "--out", dir.str(), "--set", "detector.bogus=1"}).code == 2);
  CHECK(cli({"phase-scan", "--out", dir.str(), "--set", "detector.gamma"}).code == 2);
  CHECK(cli({"keyrate", "--out", dir.str(), "--scheme", "b92"}).code == 2);
  CHECK(cli({"keyrate", "--out", dir.str(), "--set", "keyrate.losses_db=20,10"}).code == 2);
  CHECK(cli({"phase-scan", "--config", (dir.path() / "missing.conf").string()}).code == 2);
  CHECK(cli({"phase-scan", "--scheme", "traditional"}).code == 2);
  const auto r = cli({"phase-scan", "--out", dir.str(), "--set", "scan.phis="});
  CHECK(r.err.find("scan.phis") != std::string::npos);
}

TEST_CASE("unwritable output exits nonzero") {
  TempDir dir;
  const fs::path blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  const auto r = cli({"phase-scan", "--out", (blocker / "sub").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("output directory") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const auto r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("phase-scan") != std::string::npos);
}

TEST_CASE("installed binary reports exit codes") {
  TempDir dir;
  const std::string bin = SCWDR_CLI_PATH;
  const std::string quiet = " >/dev/null 2>&1";
  CHECK(exit_status("'" + bin + "' phase-scan --out '" + dir.str() + "'" + quiet) == 0);
  CHECK(fs::exists(dir.path() / "phase_scan.csv"));
  CHECK(exit_status("'" + bin + "' phase-scan --out '" + dir.str() + "' --set scan.phis=" + quiet) == 2);
  CHECK(exit_status("'" + bin + "' phase-scan --out /dev/null/x" + quiet) == 3);
}
