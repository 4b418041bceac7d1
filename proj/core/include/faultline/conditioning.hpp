#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>

#include "faultline/signal.hpp"

namespace faultline {

/// Causal moving average. During warm-up the mean runs over the samples seen
/// so far, so the first output equals the first input.
class MovingAverage {
 public:
  explicit MovingAverage(std::size_t window);

  double step(double z);

  std::size_t window() const { return window_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::size_t window_;
  std::deque<double> buffer_;
  double sum_ = 0.0;
  std::size_t steps_since_resync_ = 0;
};

/// Scalar random-walk Kalman filter with identity observation.
struct KalmanState {
  double xhat = 0.0;
  double p = 1.0;
  double q = 0.0;
  double r = 1.0;
  bool initialized = false;
  double last_gain = 0.0;
  double last_p_pred = 0.0;
};

class KalmanFilter {
 public:
  /// Throws Error{config} unless q >= 0 and r > 0.
  KalmanFilter(double q, double r);

  double step(double z);

  const KalmanState& state() const { return state_; }

 private:
  KalmanState state_;
};

/// Positive root of p^2 - q p - q r = 0: the steady-state predicted variance.
double kalman_steady_state_variance(double q, double r);

enum class FilterMode { none, ma, kalman, both };

std::optional<FilterMode> parse_filter_mode(std::string_view s);
std::string_view to_string(FilterMode m);

struct FilterConfig {
  FilterMode mode = FilterMode::kalman;
  std::size_t ma_window = 4;
  double kalman_q = 0.1;
  double kalman_r = 0.0025;
};

/// Kalman first, then moving average, when both are enabled.
class FilterChain {
 public:
  explicit FilterChain(const FilterConfig& cfg);

  double step(double z);

 private:
  FilterMode mode_;
  MovingAverage ma_;
  KalmanFilter kalman_;
};

FeatureVector extract_features(std::span<const double> frame);
inline FeatureVector extract_features(const Frame& frame) { return extract_features(frame.samples); }

}  // namespace faultline
