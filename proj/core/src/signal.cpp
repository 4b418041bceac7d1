#include "faultline/signal.hpp"

#include <string>

#include "faultline/error.hpp"

namespace faultline {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::stream: return "stream";
    case ErrorKind::input: return "input";
    case ErrorKind::solver: return "solver";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::training: return "training";
    case ErrorKind::calibration: return "calibration";
    case ErrorKind::phase: return "phase";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

FrameAssembler::FrameAssembler(std::size_t length, std::size_t hop)
    : length_(length), hop_(hop) {
  if (length < 2) throw Error(ErrorKind::config, "frame length must be >= 2");
  if (hop < 1 || hop > length) throw Error(ErrorKind::config, "frame hop must be in [1, length]");
}

std::optional<Frame> FrameAssembler::push(const RawSample& s) {
  if (last_t_ && s.t <= *last_t_) {
    throw Error(ErrorKind::stream, "non-monotone sample index " + std::to_string(s.t) +
                                       " after " + std::to_string(*last_t_));
  }
  last_t_ = s.t;
  window_.push_back(s);
  if (window_.size() > length_) window_.pop_front();
  ++since_emit_;

  if (window_.size() < length_) return std::nullopt;
  if (emitted_any_ && since_emit_ < hop_) return std::nullopt;

  emitted_any_ = true;
  since_emit_ = 0;
  Frame f;
  f.start_t = window_.front().t;
  f.samples.reserve(length_);
  for (const auto& w : window_) f.samples.push_back(w.value);
  return f;
}

std::vector<Frame> assemble_frames(std::span<const RawSample> stream, std::size_t length,
                                   std::size_t hop) {
  FrameAssembler fa(length, hop);
  std::vector<Frame> out;
  for (const auto& s : stream) {
    if (auto f = fa.push(s)) out.push_back(std::move(*f));
  }
  return out;
}

std::size_t expected_frame_count(std::size_t n, std::size_t length, std::size_t hop) {
  if (n < length) return 0;
  return (n - length) / hop + 1;
}

}  // namespace faultline
