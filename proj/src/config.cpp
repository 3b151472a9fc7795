#include "scwdr/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace scwdr {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(std::string(key) + ": expected true or false");
}

// Shortest text that parses back to the same double.
std::string exact(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += exact(values[i]);
  }
  return out;
}

std::string_view sidebands_name(SidebandSelection s) {
  switch (s) {
    case SidebandSelection::All:
      return "all";
    case SidebandSelection::FirstOrder:
      return "first";
    case SidebandSelection::PlusOne:
      return "plus1";
  }
  return "all";
}

}  // namespace

std::vector<double> parse_number_list(std::string_view text) {
  text = trim(text);
  std::vector<double> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string_view::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string_view::npos) throw ConfigError("range must be start:stop:count");
    const double start = parse_double("range start", text.substr(0, a));
    const double stop = parse_double("range stop", text.substr(a + 1, b - a - 1));
    const std::uint64_t count = parse_unsigned("range count", text.substr(b + 1));
    if (count == 0) throw ConfigError("range count must be >= 1");
    if (count == 1) return {start};
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      out.push_back(i + 1 == count ? stop : start + (stop - start) * static_cast<double>(i) / (count - 1));
    }
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(parse_double("list item", item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> default_phase_grid() { return parse_number_list("0:6.283185307179586:73"); }

RunConfig::RunConfig()
    : phis(default_phase_grid()),
      betas(parse_number_list("0.05:2:40")),
      losses_db(parse_number_list("0:60:13")) {}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  const std::string k(trim(key));
  if (k == "detector.epsilon") {
    detector.epsilon = parse_double(k, value);
  } else if (k == "detector.gamma") {
    detector.gamma = parse_double(k, value);
  } else if (k == "detector.dt") {
    detector.dt = parse_double(k, value);
  } else if (k == "detector.T") {
    detector.T = parse_double(k, value);
  } else if (k == "filter.r") {
    filter.r = parse_double(k, value);
  } else if (k == "filter.rho") {
    filter.rho = parse_double(k, value);
  } else if (k == "filter.coefficients") {
    if (value == "verbatim") {
      coefficients = CoefficientMode::Verbatim;
    } else if (value == "physical") {
      coefficients = CoefficientMode::Physical;
    } else {
      throw ConfigError(k + ": expected verbatim or physical");
    }
  } else if (k == "source.alpha0") {
    if (value == "auto") {
      alpha0.reset();
    } else {
      alpha0 = parse_double(k, value);
    }
  } else if (k == "source.peak_rate") {
    peak_rate = parse_double(k, value);
  } else if (k == "source.path_phase") {
    path_phase = parse_double(k, value);
  } else if (k == "scan.beta") {
    scan_beta = parse_double(k, value);
  } else if (k == "scan.phis") {
    phis = parse_number_list(value);
  } else if (k == "scan.betas") {
    betas = parse_number_list(value);
  } else if (k == "scan.sidebands") {
    if (value == "all") {
      sidebands = SidebandSelection::All;
    } else if (value == "first") {
      sidebands = SidebandSelection::FirstOrder;
    } else if (value == "plus1") {
      sidebands = SidebandSelection::PlusOne;
    } else {
      throw ConfigError(k + ": expected all, first or plus1");
    }
  } else if (k == "scan.points") {
    visibility_points = static_cast<int>(parse_unsigned(k, value));
  } else if (k == "tomography.duration") {
    tomo_duration = parse_double(k, value);
  } else if (k == "tomography.seed") {
    seed = parse_unsigned(k, value);
  } else if (k == "tomography.alpha0") {
    tomo_alpha0 = parse_double(k, value);
  } else if (k == "tomography.beta") {
    tomo_beta = parse_double(k, value);
  } else if (k == "tomography.v_phase_offset") {
    tomo_v_phase_offset = parse_double(k, value);
  } else if (k == "tomography.records") {
    tomo_records = std::string(value);
  } else if (k == "keyrate.losses_db") {
    losses_db = parse_number_list(value);
  } else if (k == "keyrate.scheme") {
    scheme = std::string(value);
  } else if (k == "keyrate.alpha0") {
    key_alpha0 = parse_double(k, value);
  } else if (k == "keyrate.beta") {
    key_beta = parse_double(k, value);
  } else if (k == "keyrate.f_ec") {
    f_ec = parse_double(k, value);
  } else if (k == "keyrate.optimize") {
    optimize = parse_bool(k, value);
  } else if (k == "optimize.alpha0_max") {
    bounds.alpha0_high = parse_double(k, value);
  } else if (k == "optimize.beta_max") {
    bounds.beta_high = parse_double(k, value);
  } else if (k == "optimize.grid") {
    bounds.coarse_grid = static_cast<int>(parse_unsigned(k, value));
  } else if (k == "optimize.warm_start") {
    warm_start = parse_bool(k, value);
  } else if (k == "output.dir") {
    out_dir = std::string(value);
  } else if (k == "output.format") {
    if (value == "csv") {
      format = OutputFormat::Csv;
    } else if (value == "json") {
      format = OutputFormat::Json;
    } else {
      throw ConfigError(k + ": expected csv or json");
    }
  } else if (k == "output.threads") {
    threads = static_cast<unsigned>(parse_unsigned(k, value));
  } else {
    throw ConfigError("unknown configuration key '" + k + "'");
  }
}

void RunConfig::validate() const {
  try {
    detector.validate();
    filter.validate();
    bounds.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (alpha0 && !(*alpha0 > 0.0)) throw ConfigError("source.alpha0 must be > 0");
  if (!(peak_rate > 0.0)) throw ConfigError("source.peak_rate must be > 0");
  if (!(scan_beta >= 0.0)) throw ConfigError("scan.beta must be >= 0");
  for (double b : betas) {
    if (!(b >= 0.0)) throw ConfigError("scan.betas must be >= 0");
  }
  if (visibility_points < 4) throw ConfigError("scan.points must be >= 4");
  if (!(tomo_duration > 0.0)) throw ConfigError("tomography.duration must be > 0");
  if (!(tomo_alpha0 >= 0.0) || !(tomo_beta >= 0.0)) throw ConfigError("tomography source must be >= 0");
  for (double l : losses_db) {
    if (!(l >= 0.0)) throw ConfigError("keyrate.losses_db values must be >= 0 dB");
  }
  if (!std::is_sorted(losses_db.begin(), losses_db.end())) throw ConfigError("keyrate.losses_db must be ascending");
  if (scheme != "both" && scheme != "traditional" && scheme != "discriminator") {
    throw ConfigError("keyrate.scheme must be traditional, discriminator or both");
  }
  if (!(key_alpha0 > 0.0) || !(key_beta > 0.0)) throw ConfigError("keyrate.alpha0 and keyrate.beta must be > 0");
  if (!(f_ec >= 1.0)) throw ConfigError("keyrate.f_ec must be >= 1");
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out << "detector.epsilon = " << exact(detector.epsilon) << '\n'
      << "detector.gamma = " << exact(detector.gamma) << '\n'
      << "detector.dt = " << exact(detector.dt) << '\n'
      << "detector.T = " << exact(detector.T) << '\n'
      << "filter.r = " << exact(filter.r) << '\n'
      << "filter.rho = " << exact(filter.rho) << '\n'
      << "filter.coefficients = " << (coefficients == CoefficientMode::Verbatim ? "verbatim" : "physical") << '\n'
      << "source.alpha0 = " << (alpha0 ? exact(*alpha0) : std::string("auto")) << '\n'
      << "source.peak_rate = " << exact(peak_rate) << '\n'
      << "source.path_phase = " << exact(path_phase) << '\n'
      << "scan.beta = " << exact(scan_beta) << '\n'
      << "scan.phis = " << join(phis) << '\n'
      << "scan.betas = " << join(betas) << '\n'
      << "scan.sidebands = " << sidebands_name(sidebands) << '\n'
      << "scan.points = " << visibility_points << '\n'
      << "tomography.duration = " << exact(tomo_duration) << '\n'
      << "tomography.seed = " << seed << '\n'
      << "tomography.alpha0 = " << exact(tomo_alpha0) << '\n'
      << "tomography.beta = " << exact(tomo_beta) << '\n'
      << "tomography.v_phase_offset = " << exact(tomo_v_phase_offset) << '\n'
      << "tomography.records = " << tomo_records << '\n'
      << "keyrate.losses_db = " << join(losses_db) << '\n'
      << "keyrate.scheme = " << scheme << '\n'
      << "keyrate.alpha0 = " << exact(key_alpha0) << '\n'
      << "keyrate.beta = " << exact(key_beta) << '\n'
      << "keyrate.f_ec = " << exact(f_ec) << '\n'
      << "keyrate.optimize = " << (optimize ? "true" : "false") << '\n'
      << "optimize.alpha0_max = " << exact(bounds.alpha0_high) << '\n'
      << "optimize.beta_max = " << exact(bounds.beta_high) << '\n'
      << "optimize.grid = " << bounds.coarse_grid << '\n'
      << "optimize.warm_start = " << (warm_start ? "true" : "false") << '\n'
      << "output.dir = " << out_dir << '\n'
      << "output.format = " << (format == OutputFormat::Csv ? "csv" : "json") << '\n'
      << "output.threads = " << threads << '\n';
  return out.str();
}

ProtocolParams RunConfig::protocol() const {
  ProtocolParams p;
  p.alpha0 = key_alpha0;
  p.beta = key_beta;
  p.filter = filter;
  p.det = detector;
  p.f_ec = f_ec;
  p.nu = 1.0 / detector.T;
  return p;
}

std::vector<Scheme> RunConfig::schemes() const {
  if (scheme == "both") return {Scheme::Traditional, Scheme::Discriminator};
  return {parse_scheme(scheme)};
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    base.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

RunConfig parse_config(std::string_view text) { return parse_config(text, RunConfig{}); }

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace scwdr
