#include "faultline/conditioning.hpp"

#include <algorithm>
#include <cmath>

#include "faultline/error.hpp"

namespace faultline {

MovingAverage::MovingAverage(std::size_t window) : window_(window) {
  if (window == 0) throw Error(ErrorKind::config, "moving average window must be >= 1");
}

double MovingAverage::step(double z) {
  buffer_.push_back(z);
  sum_ += z;
  if (buffer_.size() > window_) {
    sum_ -= buffer_.front();
    buffer_.pop_front();
  }
  // The running sum drifts over very long streams; resynchronize periodically.
  if (++steps_since_resync_ >= 1u << 16) {
    steps_since_resync_ = 0;
    sum_ = 0.0;
    for (double v : buffer_) sum_ += v;
  }
  return sum_ / static_cast<double>(buffer_.size());
}

KalmanFilter::KalmanFilter(double q, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorKind::config, "kalman r must be > 0");
  if (!(q >= 0.0) || !std::isfinite(q)) throw Error(ErrorKind::config, "kalman q must be >= 0");
  state_.q = q;
  state_.r = r;
  state_.p = r;
}

double KalmanFilter::step(double z) {
  auto& s = state_;
  if (!s.initialized) {
    s.initialized = true;
    s.xhat = z;
    s.p = s.r;
    return s.xhat;
  }
  const double p_pred = s.p + s.q;
  const double k = p_pred / (p_pred + s.r);
  s.xhat += k * (z - s.xhat);
  s.p = (1.0 - k) * p_pred;
  s.last_gain = k;
  s.last_p_pred = p_pred;
  return s.xhat;
}

double kalman_steady_state_variance(double q, double r) {
  return 0.5 * (q + std::sqrt(q * q + 4.0 * q * r));
}

std::optional<FilterMode> parse_filter_mode(std::string_view s) {
  if (s == "none") return FilterMode::none;
  if (s == "ma") return FilterMode::ma;
  if (s == "kalman") return FilterMode::kalman;
  if (s == "both") return FilterMode::both;
  return std::nullopt;
}

std::string_view to_string(FilterMode m) {
  switch (m) {
    case FilterMode::none: return "none";
    case FilterMode::ma: return "ma";
    case FilterMode::kalman: return "kalman";
    case FilterMode::both: return "both";
  }
  return "none";
}

FilterChain::FilterChain(const FilterConfig& cfg)
    : mode_(cfg.mode), ma_(cfg.ma_window), kalman_(cfg.kalman_q, cfg.kalman_r) {}

double FilterChain::step(double z) {
  switch (mode_) {
    case FilterMode::none: return z;
    case FilterMode::ma: return ma_.step(z);
    case FilterMode::kalman: return kalman_.step(z);
    case FilterMode::both: return ma_.step(kalman_.step(z));
  }
  return z;
}

FeatureVector extract_features(std::span<const double> frame) {
  FeatureVector fv;
  if (frame.empty()) return fv;
  double sum_sq = 0.0;
  double peak = 0.0;
  std::size_t changes = 0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double x = frame[i];
    sum_sq += x * x;
    peak = std::max(peak, std::abs(x));
    // zero counts as positive
    if (i > 0 && ((frame[i - 1] >= 0.0) != (x >= 0.0))) ++changes;
  }
  fv.rms = std::sqrt(sum_sq / static_cast<double>(frame.size()));
  // mean-of-squares rounding can put rms a few ulps above peak
  fv.rms = std::min(fv.rms, peak);
  fv.peak = peak;
  fv.crest = fv.rms > 0.0 ? fv.peak / fv.rms : 0.0;
  fv.zcr = frame.size() > 1 ? static_cast<double>(changes) / static_cast<double>(frame.size() - 1)
                            : 0.0;
  return fv;
}

}  // namespace faultline
