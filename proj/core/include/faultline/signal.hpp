#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace faultline {

inline constexpr std::size_t kFeatureDim = 4;

/// A point in feature space, as consumed by the SOM and the SVM (usually
/// after z-normalization, so no sign or ordering constraints apply).
using Point = std::array<double, kFeatureDim>;

struct RawSample {
  std::int64_t t = 0;
  double value = 0.0;
};

struct Frame {
  std::int64_t start_t = 0;
  std::vector<double> samples;
};

/// Fixed summary of one frame. peak >= rms >= 0, crest = peak / rms (0 when
/// rms is 0), zcr in [0, 1].
struct FeatureVector {
  double rms = 0.0;
  double peak = 0.0;
  double crest = 0.0;
  double zcr = 0.0;

  Point to_point() const { return {rms, peak, crest, zcr}; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class Label : int { normal = -1, fault = 1 };

constexpr double label_sign(Label y) { return static_cast<double>(static_cast<int>(y)); }
constexpr Label label_from_sign(double v) { return v >= 0.0 ? Label::fault : Label::normal; }

/// Incremental sliding-window framer. Frames are emitted as soon as W samples
/// are available, then every H samples. A trailing partial window is never
/// emitted.
class FrameAssembler {
 public:
  FrameAssembler(std::size_t length, std::size_t hop);

  /// Throws Error{stream} when t does not strictly increase.
  std::optional<Frame> push(const RawSample& s);

  std::size_t length() const { return length_; }
  std::size_t hop() const { return hop_; }
  std::size_t buffered() const { return window_.size(); }
  std::optional<std::int64_t> last_t() const { return last_t_; }

 private:
  std::size_t length_;
  std::size_t hop_;
  std::deque<RawSample> window_;
  std::size_t since_emit_ = 0;
  bool emitted_any_ = false;
  std::optional<std::int64_t> last_t_;
};

std::vector<Frame> assemble_frames(std::span<const RawSample> stream, std::size_t length,
                                   std::size_t hop);

/// floor((n - W) / H) + 1 for n >= W, else 0.
std::size_t expected_frame_count(std::size_t n, std::size_t length, std::size_t hop);

}  // namespace faultline
