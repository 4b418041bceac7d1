#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "faultline/signal.hpp"

namespace faultline {

/// Pulse-echo rig emulator: a Hann-windowed tone burst every pulse_period
/// samples, an optional defect echo that grows linearly from fault_onset over
/// fault_ramp samples, and seeded Gaussian noise.
struct SimConfig {
  std::int64_t total_samples = 160 * 4096;
  std::int64_t pulse_period = 4096;
  std::int64_t carrier_cycles = 8;
  std::int64_t samples_per_cycle = 16;
  double burst_amp = 1.0;
  std::int64_t echo_delay = 512;
  double echo_amp_max = 0.8;
  std::optional<std::int64_t> fault_onset;  // unset: 25 % of total_samples
  std::int64_t fault_ramp = 100 * 4096;
  double noise_sd = 0.05;
  std::uint64_t seed = 42;

  std::int64_t burst_length() const { return carrier_cycles * samples_per_cycle; }
  std::int64_t onset() const { return fault_onset.value_or(total_samples / 4); }

  /// Throws Error{config}.
  void validate() const;
};

struct GroundTruth {
  bool has_fault = false;
  std::int64_t fault_onset = 0;
  std::int64_t ramp = 1;
  double echo_amp_max = 0.0;
  std::int64_t first_exceed = 0;
};

struct SimOutput {
  std::vector<RawSample> samples;
  GroundTruth truth;
};

double hann(std::int64_t i, std::int64_t n);

/// Echo amplitude at sample t: A_max * clamp((t - t_on) / ramp, 0, 1).
double echo_amplitude(const SimConfig& cfg, std::int64_t t);

/// Noise-free part of the signal at sample t.
double clean_signal(const SimConfig& cfg, std::int64_t t);

GroundTruth ground_truth(const SimConfig& cfg);

SimOutput generate(const SimConfig& cfg);

/// First sample whose echo amplitude reaches theta_amp.
std::optional<std::int64_t> truth_crossing(const GroundTruth& truth, double theta_amp);

}  // namespace faultline
