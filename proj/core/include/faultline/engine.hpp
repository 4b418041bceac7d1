#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faultline/conditioning.hpp"
#include "faultline/signal.hpp"
#include "faultline/som.hpp"
#include "faultline/svm.hpp"
#include "faultline/tune.hpp"

namespace faultline {

struct EngineConfig {
  FilterConfig filter;
  std::size_t frame_length = 256;
  std::size_t frame_hop = 128;
  SomConfig som;
  double k_label = 3.0;
  // A small, heavily regularized model: pseudo-labels from the 3-sigma QE
  // rule include a few percent false positives on healthy data, and a tight
  // budget keeps them too sparse to carve out.
  SvmParams svm{KernelSpec{KernelKind::rbf, 0.5}, 0.1, 1e-6, 48};
  ParamGrid grid;
  std::size_t tune_interval = 200;
  std::size_t calib_frames = 512;
  std::size_t trend_window = 512;
  double slope_min = 1e-3;
  double detect_threshold = 0.0;
  std::uint64_t seed = 42;

  /// Throws Error{config} when any module parameter is out of bounds.
  void validate() const;
};

enum class Phase { calibrating, bootstrap, full };
std::string_view to_string(Phase p);

enum class EventKind { calibrated, fault_detected, fault_predicted, retune, stream_error };
std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct EventRecord {
  std::int64_t t = 0;
  EventKind kind = EventKind::calibrated;
  double score = 0.0;
  std::optional<double> eta;        // samples until the score reaches the threshold
  std::optional<double> amplitude;  // peak feature expected at that time
  std::string detail;

  bool is_fault() const { return kind == EventKind::fault_detected || kind == EventKind::fault_predicted; }
};

struct Trend {
  double eta = 0.0;  // in units of the time axis; 0 means the threshold is already met
  double amplitude = 0.0;
};

/// Least-squares trend extrapolation over the score history. Returns eta = 0
/// with the current peak when the latest score already meets theta, a
/// positive eta when the fitted slope exceeds slope_min and the fitted line
/// crosses theta in the future, and nothing otherwise (including a degenerate
/// time axis).
std::optional<Trend> predict_fault(std::span<const double> times, std::span<const double> scores,
                                   std::span<const double> peaks, double theta, double slope_min);

struct EngineFootprint {
  std::size_t svm_points = 0;
  std::size_t labeled_buffer = 0;
  std::size_t score_history = 0;
  std::size_t frame_buffer = 0;
  std::size_t calibration_buffer = 0;
};

/// Streaming pipeline: condition -> frame -> featurize -> pseudo-label ->
/// learn -> score -> predict. The first calib_frames frames are assumed to
/// be healthy.
class Engine {
 public:
  explicit Engine(EngineConfig cfg);

  /// Processes one sample. A non-monotone index yields a single stream_error
  /// event and leaves the state untouched.
  std::vector<EventRecord> ingest(const RawSample& s);

  /// Score of a frame's features under the current phase (normalized QE
  /// excess during bootstrap, SVM decision once both classes are known).
  /// Throws Error{phase} while calibrating. Does not touch the history.
  double score_frame(const FeatureVector& fv) const;

  const EngineConfig& config() const { return cfg_; }
  Phase phase() const { return phase_; }
  std::size_t frames_seen() const { return frames_; }
  const SvmModel& svm() const { return svm_; }
  const std::optional<SomModel>& som() const { return som_; }
  const CalibStats& calib_stats() const { return calib_; }
  const Normalizer& normalizer() const { return norm_; }
  std::vector<LabeledPoint> labeled_buffer() const { return {labeled_.begin(), labeled_.end()}; }
  std::vector<double> score_history() const { return {hist_score_.begin(), hist_score_.end()}; }
  EngineFootprint footprint() const;
  std::size_t learn_failures() const { return learn_failures_; }

 private:
  void finish_calibration(std::int64_t t, std::vector<EventRecord>& events);
  void process_frame(const Frame& frame, std::int64_t t, std::vector<EventRecord>& events);
  void maybe_retune(std::int64_t t, std::vector<EventRecord>& events);
  void learn(const Point& p, Label y);
  void enter_full();

  EngineConfig cfg_;
  FilterChain filters_;
  FrameAssembler framer_;
  Phase phase_ = Phase::calibrating;
  std::size_t frames_ = 0;

  std::vector<FeatureVector> calibration_;
  Normalizer norm_;
  std::optional<SomModel> som_;
  CalibStats calib_;

  SvmModel svm_;
  std::deque<LabeledPoint> labeled_;
  std::size_t labeled_since_tune_ = 0;
  std::size_t learn_failures_ = 0;

  std::deque<double> hist_t_;
  std::deque<double> hist_score_;
  std::deque<double> hist_peak_;
};

}  // namespace faultline
