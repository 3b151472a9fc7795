#include "scwdr/commands.hpp"

#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"
#include "scwdr/format.hpp"
#include "scwdr/tomography.hpp"

namespace scwdr {
namespace {

namespace fs = std::filesystem;

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string csv_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

nlohmann::json json_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return round_to_output(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  return std::get<std::string>(cell);
}

std::string render(const Table& table, OutputFormat format) {
  if (format == OutputFormat::Json) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& row : table.rows) {
      nlohmann::json rec = nlohmann::json::object();
      for (std::size_t c = 0; c < table.columns.size(); ++c) rec[table.columns[c]] = json_cell(row[c]);
      records.push_back(std::move(rec));
    }
    return records.dump(2) + "\n";
  }
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += csv_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

fs::path prepare_dir(const RunConfig& config) {
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw RunError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RunError("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw RunError("failed writing '" + path.string() + "'");
  return path;
}

const char* extension(OutputFormat format) { return format == OutputFormat::Json ? ".json" : ".csv"; }

void check(const RunConfig& config) { config.validate(); }

double scan_alpha0(const RunConfig& config, std::ostream& log) {
  if (config.alpha0) return *config.alpha0;
  const double a = alpha0_for_peak_rate(config.scan_beta, config.filter, config.detector, config.peak_rate,
                                        config.coefficients);
  log << "alpha0 tuned to " << format_number(a) << " for a peak m=+1 rate of " << format_number(config.peak_rate)
      << " cps at beta=" << format_number(config.scan_beta) << '\n';
  return a;
}

ScanOptions scan_options(const RunConfig& config) {
  ScanOptions o;
  o.sidebands = config.sidebands;
  o.mode = config.coefficients;
  o.path_phase = std::polar(1.0, config.path_phase);
  o.threads = config.threads;
  return o;
}

WrittenFiles run_keyrate(const RunConfig& config, bool optimize, const std::string& stem, std::ostream& log) {
  check(config);
  if (config.losses_db.empty()) throw ConfigError("keyrate.losses_db is empty");
  const fs::path dir = prepare_dir(config);
  const ProtocolParams base = config.protocol();

  Table table;
  table.columns = {"loss_db", "eta", "scheme", "alpha0", "beta", "K_bits_per_s", "Q", "P_B", "chi"};
  if (optimize) {
    table.columns.insert(table.columns.end(), {"alpha0_opt", "beta_opt", "below_cutoff"});
  }
  bool clipped = false;
  std::vector<std::string> failures;

  for (Scheme scheme : config.schemes()) {
    std::vector<SweepRow> rows;
    if (optimize) {
      SweepOptions opts;
      opts.warm_start = config.warm_start;
      opts.threads = config.threads;
      SweepTable swept = sweep(scheme, base, config.losses_db, config.bounds, opts);
      if (!swept.monotone) failures.emplace_back(std::string(to_string(scheme)));
      rows = std::move(swept.rows);
    } else {
      rows.resize(config.losses_db.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].loss_db = config.losses_db[i];
        rows[i].eta = ChannelSpec::from_loss_db(config.losses_db[i]).eta;
        rows[i].optimum.rate = key_rate(scheme, base, rows[i].eta);
        rows[i].optimum.alpha0 = base.alpha0;
        rows[i].optimum.beta = base.beta;
      }
    }
    for (const auto& row : rows) {
      const KeyRateResult& r = row.optimum.rate;
      clipped = clipped || r.clipped;
      std::vector<Cell> cells{row.loss_db, row.eta,   std::string(to_string(scheme)),
                              r.alpha0,    r.beta,    std::max(0.0, r.K),
                              r.Q,         r.P_B,     r.chi};
      if (optimize) {
        cells.emplace_back(row.optimum.alpha0);
        cells.emplace_back(row.optimum.beta);
        cells.emplace_back(static_cast<std::int64_t>(row.optimum.below_cutoff ? 1 : 0));
      }
      table.rows.push_back(std::move(cells));
    }
  }

  WrittenFiles files{write_file(dir / (stem + extension(config.format)), render(table, config.format))};
  if (clipped) log << "warning: click probability left the linear detector regime and was clipped to 1\n";
  if (!failures.empty()) {
    throw RunError("optimizer failure: key rate increases with loss for scheme " + failures.front());
  }
  return files;
}

}  // namespace

WrittenFiles cmd_phase_scan(const RunConfig& config, std::ostream& log) {
  check(config);
  if (config.phis.empty()) throw ConfigError("scan.phis is empty");
  const fs::path dir = prepare_dir(config);
  const double alpha0 = scan_alpha0(config, log);
  const auto rows = phase_scan(config.scan_beta, Complex{alpha0, 0.0}, config.filter, config.detector, config.phis,
                               scan_options(config));
  Table table{{"delta_phi_rad", "rate_h_norm", "rate_v_norm"}, {}};
  std::vector<double> h;
  std::vector<double> v;
  for (const auto& row : rows) {
    table.rows.push_back({row.delta_phi, row.rate_h_norm, row.rate_v_norm});
    h.push_back(row.rate_h);
    v.push_back(row.rate_v);
  }
  log << "visibility H=" << format_number(visibility(h)) << " V=" << format_number(visibility(v)) << '\n';
  return {write_file(dir / (std::string("phase_scan") + extension(config.format)), render(table, config.format))};
}

WrittenFiles cmd_visibility(const RunConfig& config, std::ostream& log) {
  check(config);
  if (config.betas.empty()) throw ConfigError("scan.betas is empty");
  const fs::path dir = prepare_dir(config);
  const double alpha0 = scan_alpha0(config, log);
  const auto rows = visibility_vs_beta(config.betas, Complex{alpha0, 0.0}, config.filter, config.detector,
                                       scan_options(config), config.visibility_points);
  Table table{{"beta", "visibility"}, {}};
  for (const auto& row : rows) table.rows.push_back({row.beta, row.visibility});
  return {write_file(dir / (std::string("visibility") + extension(config.format)), render(table, config.format))};
}

WrittenFiles cmd_tomography(const RunConfig& config, std::ostream& log) {
  check(config);
  const fs::path dir = prepare_dir(config);
  WrittenFiles files;

  if (!config.tomo_records.empty()) {
    std::ifstream in(config.tomo_records);
    if (!in) throw RunError("cannot read records '" + config.tomo_records + "'");
    std::vector<TomographyRecord> records;
    try {
      records = read_records_csv(in);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    const MleResult mle = mle_reconstruct_detailed(records);
    if (!mle.converged) log << "warning: reconstruction stopped at the iteration cap\n";
    files.push_back(write_file(dir / "rho_measured.json", density_matrix_json(mle.rho) + "\n"));
    return files;
  }

  Table1Options options;
  options.alpha0 = config.tomo_alpha0;
  options.beta = config.tomo_beta;
  options.v_phase_offset = config.tomo_v_phase_offset;
  const auto rows = table1_pipeline(config.detector, config.tomo_duration, config.seed, options);

  Table summary{{"delta_phi_rad", "target", "fidelity"}, {}};
  for (const auto& row : rows) {
    summary.rows.push_back({row.delta_phi, row.target_label, row.fidelity});
    files.push_back(write_file(dir / ("rho_" + row.target_label + ".json"), density_matrix_json(row.rho) + "\n"));
    std::ostringstream csv;
    write_records_csv(csv, row.records);
    files.push_back(write_file(dir / ("records_" + row.target_label + ".csv"), csv.str()));
    log << "dphi=" << format_number(row.delta_phi) << " target=" << row.target_label
        << " fidelity=" << format_number(row.fidelity) << '\n';
  }
  files.push_back(write_file(dir / (std::string("tomography_fidelity") + extension(config.format)),
                             render(summary, config.format)));
  return files;
}

WrittenFiles cmd_keyrate(const RunConfig& config, bool optimize, std::ostream& log) {
  return run_keyrate(config, optimize || config.optimize, "keyrate", log);
}

WrittenFiles cmd_optimize(const RunConfig& config, std::ostream& log) {
  return run_keyrate(config, true, "optimize", log);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SCW to dual-rail interface simulator and key-rate optimizer", "scwdr"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string scheme;
  std::string records;
  bool optimize_flag = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Configuration file (key = value)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed, "Tomography RNG seed");
    sub->add_option("--threads", threads, "Worker threads (0: all processors)");
    sub->add_option("--set", overrides, "Override a configuration key: key=value");
  };

  auto* phase = app.add_subcommand("phase-scan", "Port count rates versus phase difference");
  auto* vis = app.add_subcommand("visibility", "Interference visibility versus modulation depth");
  auto* tomo = app.add_subcommand("tomography", "Polarization tomography of the m=+1 output");
  auto* key = app.add_subcommand("keyrate", "Key rate versus channel loss");
  auto* opt = app.add_subcommand("optimize", "Key rate versus loss with per-point (alpha0, beta) optimization");
  for (auto* sub : {phase, vis, tomo, key, opt}) common(sub);
  tomo->add_option("--records", records, "Reconstruct a measured records CSV instead of simulating");
  for (auto* sub : {key, opt}) {
    sub->add_option("--scheme", scheme, "traditional, discriminator or both")
        ->check(CLI::IsMember({"traditional", "discriminator", "both"}));
  }
  key->add_flag("--optimize", optimize_flag, "Optimize alpha0 and beta at each loss");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const std::string& assignment : overrides) {
      const auto eq = assignment.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
      config.set(assignment.substr(0, eq), assignment.substr(eq + 1));
    }
    auto* active = app.get_subcommands().front();
    auto given = [active](const char* name) {
      const CLI::Option* o = active->get_option_no_throw(name);
      return o != nullptr && o->count() > 0;
    };
    if (given("--out")) config.out_dir = out_dir;
    if (given("--format")) config.set("output.format", format);
    if (given("--seed")) config.seed = seed;
    if (given("--threads")) config.threads = threads;
    if (given("--scheme")) config.scheme = scheme;
    if (given("--records")) config.tomo_records = records;

    WrittenFiles files;
    if (active == phase) {
      files = cmd_phase_scan(config, err);
    } else if (active == vis) {
      files = cmd_visibility(config, err);
    } else if (active == tomo) {
      files = cmd_tomography(config, err);
    } else if (active == key) {
      files = cmd_keyrate(config, optimize_flag, err);
    } else {
      files = cmd_optimize(config, err);
    }
    for (const auto& f : files) out << f.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace scwdr
