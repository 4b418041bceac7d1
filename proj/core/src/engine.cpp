#include "faultline/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "faultline/error.hpp"

namespace faultline {

namespace {

constexpr double kTinySd = 1e-12;
// Fixed offset from the global seed for the SOM initialization stream.
constexpr std::uint64_t kSomSeedOffset = 1;

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

std::optional<Line> ols(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  const double a = sxy / sxx;
  return Line{a, my - a * mx};
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void EngineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
  if (filter.ma_window < 1) fail("filter.ma_window must be >= 1");
  if (!(filter.kalman_r > 0.0)) fail("filter.kalman_r must be > 0");
  if (!(filter.kalman_q >= 0.0)) fail("filter.kalman_q must be >= 0");
  if (frame_length < 2) fail("frame.length must be >= 2");
  if (frame_hop < 1 || frame_hop > frame_length) fail("frame.hop must be in [1, frame.length]");
  som.validate();
  if (!(k_label > 0.0)) fail("som.k_label must be > 0");
  svm.validate();
  grid.validate();
  if (tune_interval < 1) fail("tune.interval must be >= 1");
  if (calib_frames < 10) fail("engine.calib_frames must be >= 10");
  if (trend_window < 3) fail("engine.trend_window must be >= 3");
  if (!(slope_min > 0.0)) fail("engine.slope_min must be > 0");
  if (!std::isfinite(detect_threshold)) fail("engine.detect_threshold must be finite");
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::calibrating: return "calibrating";
    case Phase::bootstrap: return "bootstrap";
    case Phase::full: return "full";
  }
  return "calibrating";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::calibrated: return "calibrated";
    case EventKind::fault_detected: return "fault_detected";
    case EventKind::fault_predicted: return "fault_predicted";
    case EventKind::retune: return "retune";
    case EventKind::stream_error: return "stream_error";
  }
  return "calibrated";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::calibrated, EventKind::fault_detected, EventKind::fault_predicted,
                 EventKind::retune, EventKind::stream_error}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<Trend> predict_fault(std::span<const double> times, std::span<const double> scores,
                                   std::span<const double> peaks, double theta, double slope_min) {
  if (times.empty() || times.size() != scores.size() || times.size() != peaks.size()) return std::nullopt;
  const double t_now = times.back();
  if (scores.back() >= theta) return Trend{0.0, peaks.back()};

  const auto score_line = ols(times, scores);
  if (!score_line || !(score_line->slope > slope_min)) return std::nullopt;
  const double crossing = (theta - score_line->intercept) / score_line->slope;
  const double eta = crossing - t_now;
  if (!(eta > 0.0)) return std::nullopt;

  const auto peak_line = ols(times, peaks);
  const double amplitude = peak_line ? peak_line->slope * crossing + peak_line->intercept : peaks.back();
  return Trend{eta, amplitude};
}

Engine::Engine(EngineConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      filters_(cfg_.filter),
      framer_(cfg_.frame_length, cfg_.frame_hop),
      svm_(cfg_.svm) {
  cfg_.som.seed = cfg_.seed + kSomSeedOffset;
  calibration_.reserve(cfg_.calib_frames);
}

EngineFootprint Engine::footprint() const {
  return {svm_.size(), labeled_.size(), hist_score_.size(), framer_.buffered(), calibration_.size()};
}

std::vector<EventRecord> Engine::ingest(const RawSample& s) {
  std::vector<EventRecord> events;
  if (const auto last = framer_.last_t(); last && s.t <= *last) {
    events.push_back({s.t, EventKind::stream_error, 0.0, std::nullopt, std::nullopt,
                      "non-monotone sample index " + std::to_string(s.t) + " after " + std::to_string(*last)});
    return events;
  }
  const double conditioned = filters_.step(s.value);
  if (auto frame = framer_.push({s.t, conditioned})) process_frame(*frame, s.t, events);
  return events;
}

double Engine::score_frame(const FeatureVector& fv) const {
  if (phase_ == Phase::calibrating) throw Error(ErrorKind::phase, "cannot score frames while calibrating");
  const Point p = norm_.apply(fv.to_point());
  if (phase_ == Phase::bootstrap) {
    const double qe = som_->quantization_error(p);
    return (qe - calib_.threshold()) / std::max(calib_.sd_qe, kTinySd);
  }
  return svm_.decision(p);
}

void Engine::finish_calibration(std::int64_t t, std::vector<EventRecord>& events) {
  std::vector<Point> raw;
  raw.reserve(calibration_.size());
  for (const auto& fv : calibration_) raw.push_back(fv.to_point());
  norm_ = Normalizer::fit(raw);
  std::vector<Point> normalized;
  normalized.reserve(raw.size());
  for (const auto& p : raw) normalized.push_back(norm_.apply(p));

  som_.emplace(cfg_.som);
  som_->fit(normalized);
  calib_ = CalibStats::compute(*som_, normalized, cfg_.k_label);
  calibration_.clear();
  calibration_.shrink_to_fit();
  phase_ = Phase::bootstrap;

  events.push_back({t, EventKind::calibrated, 0.0, std::nullopt, std::nullopt,
                    "mu_qe=" + format_number(calib_.mu_qe) + " sd_qe=" + format_number(calib_.sd_qe) +
                        " threshold=" + format_number(calib_.threshold())});
}

void Engine::learn(const Point& p, Label y) {
  try {
    svm_.learn_one(p, y);
  } catch (const Error& e) {
    // The model is unchanged; the point still lives in the labeled buffer.
    if (e.kind() != ErrorKind::solver) throw;
    ++learn_failures_;
  }
}

void Engine::process_frame(const Frame& frame, std::int64_t t, std::vector<EventRecord>& events) {
  const std::size_t index = frames_++;
  const FeatureVector fv = extract_features(frame);

  if (phase_ == Phase::calibrating) {
    calibration_.push_back(fv);
    if (calibration_.size() == cfg_.calib_frames) finish_calibration(t, events);
    return;
  }

  const Point p = norm_.apply(fv.to_point());
  const Label y = pseudo_label(calib_, som_->quantization_error(p));
  labeled_.push_back({p, y});
  if (labeled_.size() > cfg_.svm.budget) labeled_.pop_front();
  learn(p, y);
  if (phase_ == Phase::bootstrap && svm_.has_both_classes()) enter_full();

  const double score = score_frame(fv);
  hist_t_.push_back(static_cast<double>(index));
  hist_score_.push_back(score);
  hist_peak_.push_back(fv.peak);
  if (hist_score_.size() > cfg_.trend_window) {
    hist_t_.pop_front();
    hist_score_.pop_front();
    hist_peak_.pop_front();
  }

  if (score >= cfg_.detect_threshold) {
    events.push_back({t, EventKind::fault_detected, score, std::nullopt, fv.peak,
                      std::string("phase=") + std::string(to_string(phase_))});
  } else if (hist_score_.size() == cfg_.trend_window) {
    const std::vector<double> ts(hist_t_.begin(), hist_t_.end());
    const std::vector<double> ss(hist_score_.begin(), hist_score_.end());
    const std::vector<double> ps(hist_peak_.begin(), hist_peak_.end());
    if (auto trend = predict_fault(ts, ss, ps, cfg_.detect_threshold, cfg_.slope_min); trend && trend->eta > 0.0) {
      events.push_back({t, EventKind::fault_predicted, score, trend->eta * static_cast<double>(cfg_.frame_hop),
                        trend->amplitude, std::string("phase=") + std::string(to_string(phase_))});
    }
  }

  ++labeled_since_tune_;
  if (labeled_since_tune_ >= cfg_.tune_interval) maybe_retune(t, events);
}

// Bootstrap scores (QE excess) and SVM decisions live on different scales;
// a trend fitted across the switch would be meaningless.
void Engine::enter_full() {
  phase_ = Phase::full;
  hist_t_.clear();
  hist_score_.clear();
  hist_peak_.clear();
}

void Engine::maybe_retune(std::int64_t t, std::vector<EventRecord>& events) {
  labeled_since_tune_ = 0;
  const std::vector<LabeledPoint> buffer(labeled_.begin(), labeled_.end());
  std::optional<TuneResult> best;
  try {
    best = grid_search(buffer, cfg_.grid, cfg_.svm.kernel.kind);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::insufficient_data) throw;
  }
  if (best) {
    cfg_.svm.c = best->c;
    if (cfg_.svm.kernel.kind == KernelKind::rbf) cfg_.svm.kernel.gamma = best->gamma;
  }

  // Rebuild from the buffer even when tuning was skipped: eviction keeps
  // support vectors indefinitely, so without this the model would outlive
  // the labeled window. A FULL model is only replaced by one that still
  // knows both classes.
  const bool has_fault = std::any_of(buffer.begin(), buffer.end(), [](const auto& lp) { return lp.y == Label::fault; });
  const bool has_normal = std::any_of(buffer.begin(), buffer.end(), [](const auto& lp) { return lp.y == Label::normal; });
  if (best || phase_ == Phase::bootstrap || (has_fault && has_normal)) {
    svm_ = SvmModel(cfg_.svm);
    for (const auto& lp : buffer) learn(lp.x, lp.y);
    if (phase_ == Phase::bootstrap && svm_.has_both_classes()) enter_full();
  }
  if (!best) return;

  events.push_back({t, EventKind::retune, best->cv_accuracy, std::nullopt, std::nullopt,
                    "c=" + format_number(best->c) + " gamma=" + format_number(best->gamma) +
                        " cv_accuracy=" + format_number(best->cv_accuracy)});
}

}  // namespace faultline
