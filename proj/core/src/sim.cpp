#include "faultline/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "faultline/error.hpp"

namespace faultline {

void SimConfig::validate() const {
  auto fail = [](const char* msg) { throw Error(ErrorKind::config, msg); };
  if (total_samples <= 0) fail("sim.total_samples must be > 0");
  if (pulse_period <= 0) fail("sim.pulse_period must be > 0");
  if (carrier_cycles < 1) fail("sim.carrier_cycles must be >= 1");
  if (samples_per_cycle < 4) fail("sim.samples_per_cycle must be >= 4");
  if (!(burst_amp > 0.0)) fail("sim.burst_amp must be > 0");
  if (!(echo_amp_max >= 0.0)) fail("sim.echo_amp_max must be >= 0");
  if (fault_ramp < 1) fail("sim.fault_ramp must be >= 1");
  if (!(noise_sd >= 0.0)) fail("sim.noise_sd must be >= 0");
  if (fault_onset && *fault_onset < 0) fail("sim.fault_onset must be >= 0");
  if (!(burst_length() < echo_delay)) fail("burst length must be shorter than sim.echo_delay");
  if (!(echo_delay + burst_length() < pulse_period)) fail("echo must end before the next burst");
}

double hann(std::int64_t i, std::int64_t n) {
  if (n < 2) return 1.0;
  return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
}

double echo_amplitude(const SimConfig& cfg, std::int64_t t) {
  const double frac = static_cast<double>(t - cfg.onset()) / static_cast<double>(cfg.fault_ramp);
  return cfg.echo_amp_max * std::clamp(frac, 0.0, 1.0);
}

double clean_signal(const SimConfig& cfg, std::int64_t t) {
  const std::int64_t nb = cfg.burst_length();
  const std::int64_t i = t % cfg.pulse_period;
  const double m = static_cast<double>(cfg.samples_per_cycle);
  double v = 0.0;
  if (i < nb) {
    v += cfg.burst_amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / m) * hann(i, nb);
  }
  if (i >= cfg.echo_delay && i < cfg.echo_delay + nb) {
    const std::int64_t k = i - cfg.echo_delay;
    const double a = echo_amplitude(cfg, t);
    if (a > 0.0) v += a * std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / m) * hann(k, nb);
  }
  return v;
}

GroundTruth ground_truth(const SimConfig& cfg) {
  GroundTruth g;
  g.fault_onset = cfg.onset();
  g.ramp = cfg.fault_ramp;
  g.echo_amp_max = cfg.echo_amp_max;
  g.has_fault = cfg.echo_amp_max > 0.0;
  g.first_exceed = g.fault_onset + 1;
  return g;
}

SimOutput generate(const SimConfig& cfg) {
  cfg.validate();
  SimOutput out;
  out.truth = ground_truth(cfg);
  out.samples.reserve(static_cast<std::size_t>(cfg.total_samples));
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::int64_t t = 0; t < cfg.total_samples; ++t) {
    double v = clean_signal(cfg, t);
    if (cfg.noise_sd > 0.0) v += cfg.noise_sd * noise(rng);
    out.samples.push_back({t, v});
  }
  return out;
}

std::optional<std::int64_t> truth_crossing(const GroundTruth& truth, double theta_amp) {
  if (!truth.has_fault || !(truth.echo_amp_max > 0.0)) return std::nullopt;
  if (theta_amp > truth.echo_amp_max) return std::nullopt;
  if (theta_amp <= 0.0) return truth.fault_onset;
  // Integer search guards against the ceil landing one sample off through
  // rounding of ramp * theta / A_max.
  auto t = truth.fault_onset +
           static_cast<std::int64_t>(std::ceil(static_cast<double>(truth.ramp) * theta_amp / truth.echo_amp_max));
  auto reached = [&](std::int64_t s) {
    const double frac = static_cast<double>(s - truth.fault_onset) / static_cast<double>(truth.ramp);
    return truth.echo_amp_max * std::clamp(frac, 0.0, 1.0) >= theta_amp;
  };
  while (t > truth.fault_onset && reached(t - 1)) --t;
  while (!reached(t)) ++t;
  return t;
}

}  // namespace faultline
