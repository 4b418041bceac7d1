#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "faultline/engine.hpp"
#include "faultline/sim.hpp"

namespace faultline::cli {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// Sample CSV: header `t,value`, one row per sample.
void write_samples_csv(std::ostream& out, std::span<const RawSample> samples);

class SampleCsvReader {
 public:
  /// Reads and checks the header; throws Error{parse} when it is missing.
  explicit SampleCsvReader(std::istream& in);

  struct Row {
    std::size_t line = 0;
    std::optional<RawSample> sample;  // empty when the row is malformed
    std::string raw;
  };

  /// Next non-empty data row, or nothing at end of input.
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::optional<RawSample> parse_sample_row(std::string_view row);

// Event JSON Lines: keys t, kind, score, [eta], [amplitude], detail.
std::string event_to_json(const EventRecord& e);
/// Throws Error{parse}.
EventRecord event_from_json(std::string_view line);
std::vector<EventRecord> read_events(std::istream& in);

// Ground truth JSON: fault_onset, ramp, echo_amp_max, first_exceed; an empty
// object when the stream is fault-free.
std::string truth_to_json(const GroundTruth& truth);
/// Throws Error{parse}.
GroundTruth truth_from_json(std::istream& in);

struct EvalReport {
  bool detected = false;
  std::optional<std::int64_t> detection_delay;
  std::size_t false_alarms = 0;
  std::optional<double> eta_mape;
  std::size_t eta_count = 0;
  std::size_t events_total = 0;
};

/// Fault events before the onset (or any, on fault-free truth) count as
/// false alarms; detection uses the first fault event at or after the onset.
/// eta_mape is the mean of 100 * |eta - remaining| / remaining (percent) over fault_predicted
/// events with t in [eta_from, crossing), where remaining = crossing - t and
/// crossing = truth_crossing(truth, theta_amp).
EvalReport evaluate(std::span<const EventRecord> events, const GroundTruth& truth, double theta_amp,
                    std::int64_t eta_from = 0);

std::string report_to_json(const EvalReport& r);

}  // namespace faultline::cli
