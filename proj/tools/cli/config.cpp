#include "cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string_view>

#include "faultline/error.hpp"

namespace faultline::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw Error(ErrorKind::config,
              "config: " + std::string(key) + " = '" + std::string(value) + "' is not " + expected);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::size_t to_size(std::string_view key, std::string_view v) {
  if (!v.empty() && v.front() == '-') bad_value(key, v, "a non-negative integer");
  return to_int<std::size_t>(key, v);
}

std::vector<double> to_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(to_double(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) bad_value(key, v, "a comma-separated list");
  return out;
}

using Setter = std::function<void(AppConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"seed", [](AppConfig& c, auto k, auto v) { c.set_seed(to_int<std::uint64_t>(k, v)); }},

      {"filter.mode",
       [](AppConfig& c, auto k, auto v) {
         const auto m = parse_filter_mode(v);
         if (!m) bad_value(k, v, "one of none|ma|kalman|both");
         c.engine.filter.mode = *m;
       }},
      {"filter.ma_window", [](AppConfig& c, auto k, auto v) { c.engine.filter.ma_window = to_size(k, v); }},
      {"filter.kalman_q", [](AppConfig& c, auto k, auto v) { c.engine.filter.kalman_q = to_double(k, v); }},
      {"filter.kalman_r", [](AppConfig& c, auto k, auto v) { c.engine.filter.kalman_r = to_double(k, v); }},

      {"frame.length", [](AppConfig& c, auto k, auto v) { c.engine.frame_length = to_size(k, v); }},
      {"frame.hop", [](AppConfig& c, auto k, auto v) { c.engine.frame_hop = to_size(k, v); }},

      {"som.grid", [](AppConfig& c, auto k, auto v) { c.engine.som.grid = to_size(k, v); }},
      {"som.alpha0", [](AppConfig& c, auto k, auto v) { c.engine.som.alpha0 = to_double(k, v); }},
      {"som.alpha_final", [](AppConfig& c, auto k, auto v) { c.engine.som.alpha_final = to_double(k, v); }},
      {"som.sigma0", [](AppConfig& c, auto k, auto v) { c.engine.som.sigma0 = to_double(k, v); }},
      {"som.sigma_final", [](AppConfig& c, auto k, auto v) { c.engine.som.sigma_final = to_double(k, v); }},
      {"som.steps", [](AppConfig& c, auto k, auto v) { c.engine.som.steps = to_size(k, v); }},
      {"som.k_label", [](AppConfig& c, auto k, auto v) { c.engine.k_label = to_double(k, v); }},

      {"svm.kernel",
       [](AppConfig& c, auto k, auto v) {
         const auto kind = parse_kernel_kind(v);
         if (!kind) bad_value(k, v, "one of linear|rbf");
         c.engine.svm.kernel.kind = *kind;
       }},
      {"svm.c", [](AppConfig& c, auto k, auto v) { c.engine.svm.c = to_double(k, v); }},
      {"svm.gamma", [](AppConfig& c, auto k, auto v) { c.engine.svm.kernel.gamma = to_double(k, v); }},
      {"svm.budget", [](AppConfig& c, auto k, auto v) { c.engine.svm.budget = to_size(k, v); }},
      {"svm.epsilon", [](AppConfig& c, auto k, auto v) { c.engine.svm.epsilon = to_double(k, v); }},

      {"tune.interval", [](AppConfig& c, auto k, auto v) { c.engine.tune_interval = to_size(k, v); }},
      {"tune.c_values", [](AppConfig& c, auto k, auto v) { c.engine.grid.c_values = to_list(k, v); }},
      {"tune.gamma_values", [](AppConfig& c, auto k, auto v) { c.engine.grid.gamma_values = to_list(k, v); }},
      {"tune.folds", [](AppConfig& c, auto k, auto v) { c.engine.grid.k_folds = to_size(k, v); }},

      {"engine.calib_frames", [](AppConfig& c, auto k, auto v) { c.engine.calib_frames = to_size(k, v); }},
      {"engine.trend_window", [](AppConfig& c, auto k, auto v) { c.engine.trend_window = to_size(k, v); }},
      {"engine.slope_min", [](AppConfig& c, auto k, auto v) { c.engine.slope_min = to_double(k, v); }},
      {"engine.detect_threshold",
       [](AppConfig& c, auto k, auto v) { c.engine.detect_threshold = to_double(k, v); }},

      {"sim.total_samples", [](AppConfig& c, auto k, auto v) { c.sim.total_samples = to_int<std::int64_t>(k, v); }},
      {"sim.pulse_period", [](AppConfig& c, auto k, auto v) { c.sim.pulse_period = to_int<std::int64_t>(k, v); }},
      {"sim.carrier_cycles", [](AppConfig& c, auto k, auto v) { c.sim.carrier_cycles = to_int<std::int64_t>(k, v); }},
      {"sim.samples_per_cycle",
       [](AppConfig& c, auto k, auto v) { c.sim.samples_per_cycle = to_int<std::int64_t>(k, v); }},
      {"sim.burst_amp", [](AppConfig& c, auto k, auto v) { c.sim.burst_amp = to_double(k, v); }},
      {"sim.echo_delay", [](AppConfig& c, auto k, auto v) { c.sim.echo_delay = to_int<std::int64_t>(k, v); }},
      {"sim.echo_amp_max", [](AppConfig& c, auto k, auto v) { c.sim.echo_amp_max = to_double(k, v); }},
      {"sim.fault_onset", [](AppConfig& c, auto k, auto v) { c.sim.fault_onset = to_int<std::int64_t>(k, v); }},
      {"sim.fault_ramp", [](AppConfig& c, auto k, auto v) { c.sim.fault_ramp = to_int<std::int64_t>(k, v); }},
      {"sim.noise_sd", [](AppConfig& c, auto k, auto v) { c.sim.noise_sd = to_double(k, v); }},
  };
  return table;
}

}  // namespace

AppConfig parse_config(std::istream& in) {
  AppConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::config, "config line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(sv.substr(0, eq));
    const auto value = trim(sv.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw Error(ErrorKind::config, "config line " + std::to_string(lineno) + ": unknown key '" +
                                         std::string(key) + "'");
    it->second(cfg, key, value);
  }
  cfg.engine.validate();
  cfg.sim.validate();
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file " + path.string());
  return parse_config(in);
}

std::string config_keys_help() {
  std::ostringstream os;
  for (const auto& [key, _] : setters()) os << "  " << key << '\n';
  return os.str();
}

}  // namespace faultline::cli
