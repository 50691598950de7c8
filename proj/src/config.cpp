#include "bq/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "n",        "side_length", "dealias_fraction", "nu",         "kappa",      "alpha",
      "beta",     "critical",    "dt_init",          "cfl_number", "t_end",      "fixed_dt",
      "max_steps", "init",       "seed",             "band_lo",    "band_hi",    "diag_every",
      "checkpoint_every", "out_dir", "q",            "s",          "oss_C",      "oss_L"};
  return keys;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "n") {
    const long n = to_long(key, value);
    if (n < 8 || n > (1 << 14)) throw ConfigError("n: must lie in [8, 16384]");
    c.grid.n = static_cast<int>(n);
  } else if (key == "side_length") {
    c.grid.side_length = to_double(key, value);
  } else if (key == "dealias_fraction") {
    c.grid.dealias_fraction = to_double(key, value);
  } else if (key == "nu") {
    c.params.nu = to_double(key, value);
  } else if (key == "kappa") {
    c.params.kappa = to_double(key, value);
  } else if (key == "alpha") {
    c.params.alpha = to_double(key, value);
  } else if (key == "beta") {
    c.params.beta = to_double(key, value);
  } else if (key == "critical") {
    c.params.critical = to_bool(key, value);
  } else if (key == "dt_init") {
    c.stepper.dt_init = to_double(key, value);
  } else if (key == "cfl_number") {
    c.stepper.cfl_number = to_double(key, value);
  } else if (key == "t_end") {
    c.stepper.t_end = to_double(key, value);
  } else if (key == "fixed_dt") {
    c.stepper.fixed_dt = to_bool(key, value);
  } else if (key == "max_steps") {
    c.stepper.max_steps = to_long(key, value);
  } else if (key == "init") {
    try {
      c.init = parse_init_kind(value);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("init: ") + e.what());
    }
  } else if (key == "seed") {
    c.seed = to_u64(key, value);
  } else if (key == "band_lo") {
    c.init_options.band_lo = to_double(key, value);
  } else if (key == "band_hi") {
    c.init_options.band_hi = to_double(key, value);
  } else if (key == "diag_every") {
    c.diag_every = to_long(key, value);
  } else if (key == "checkpoint_every") {
    c.checkpoint_every = to_long(key, value);
  } else if (key == "out_dir") {
    c.out_dir = value;
  } else if (key == "q") {
    c.monitor_q = to_double(key, value);
  } else if (key == "s") {
    c.monitor_s = to_double(key, value);
  } else if (key == "oss_C") {
    c.oss_C_user = to_double(key, value);
  } else if (key == "oss_L") {
    c.oss_L = to_double(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
  c.explicit_keys.push_back(key);
}

void RunConfig::validate() const {
  auto wrap = [](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string(what) + ": " + e.what());
    }
  };
  wrap("grid", [&] { grid.validate(); });
  wrap("params", [&] { params.validate(); });
  wrap("stepper", [&] { stepper.validate(); });
  if (diag_every < 1) throw ConfigError("diag_every: must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every: must be >= 0");
  if (out_dir.empty()) throw ConfigError("out_dir: must not be empty");
  if (!(oss_C_user > 0.0)) throw ConfigError("oss_C: must be positive");
  const double L = oss_radius();
  if (!(L > 0.0 && L <= grid.side_length / 2.0)) throw ConfigError("oss_L: must lie in (0, side_length / 2]");
  if (!(init_options.band_lo >= 0.0)) throw ConfigError("band_lo: must be nonnegative");
  if (init_options.band_hi > 0.0 && init_options.band_hi < init_options.band_lo)
    throw ConfigError("band_hi: must be >= band_lo");
  if (init_options.band_hi > grid.dealias_fraction * grid.n / 2.0)
    throw ConfigError("band_hi: exceeds the dealiased band of the grid");
  if (monitor_q || monitor_s) wrap(monitor_q ? "q" : "s", [&] { monitor_settings(); });
}

MonitorSettings RunConfig::monitor_settings() const {
  return resolve_monitor_settings(params.alpha, monitor_q, monitor_s, oss_radius());
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig c;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (value.empty()) throw ConfigError(where + key + ": missing value");
    if (!seen.insert(key).second) throw ConfigError(where + key + ": duplicate key");
    try {
      set_config_value(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

void apply_overrides(RunConfig& c, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("--set: expected key=value, got '" + a + "'");
    const auto key = trim(a.substr(0, eq));
    try {
      set_config_value(c, key, trim(a.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("--set: ") + e.what());
    }
  }
}

std::string resolved_out_dir(const RunConfig& c) {
  if (const char* env = std::getenv("BQSIM_OUT_DIR"); env && *env) return env;
  return c.out_dir;
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  auto d = [](double v) { return format_double(v); };
  os << "n = " << c.grid.n << "\n"
     << "side_length = " << d(c.grid.side_length) << "\n"
     << "dealias_fraction = " << d(c.grid.dealias_fraction) << "\n"
     << "nu = " << d(c.params.nu) << "\n"
     << "kappa = " << d(c.params.kappa) << "\n"
     << "alpha = " << d(c.params.alpha) << "\n"
     << "beta = " << d(c.params.beta) << "\n"
     << "critical = " << (c.params.critical ? "true" : "false") << "\n"
     << "dt_init = " << d(c.stepper.dt_init) << "\n"
     << "cfl_number = " << d(c.stepper.cfl_number) << "\n"
     << "t_end = " << d(c.stepper.t_end) << "\n"
     << "fixed_dt = " << (c.stepper.fixed_dt ? "true" : "false") << "\n"
     << "max_steps = " << c.stepper.max_steps << "\n"
     << "init = " << init_kind_name(c.init) << "\n"
     << "seed = " << c.seed << "\n"
     << "band_lo = " << d(c.init_options.band_lo) << "\n"
     << "band_hi = " << d(c.init_options.band_hi) << "\n"
     << "diag_every = " << c.diag_every << "\n"
     << "checkpoint_every = " << c.checkpoint_every << "\n"
     << "out_dir = " << c.out_dir << "\n";
  if (c.monitor_q) os << "q = " << d(*c.monitor_q) << "\n";
  if (c.monitor_s) os << "s = " << d(*c.monitor_s) << "\n";
  os << "oss_C = " << d(c.oss_C_user) << "\n";
  if (c.oss_L) os << "oss_L = " << d(*c.oss_L) << "\n";
  return os.str();
}

}  // namespace bq
