#include "cli/formats.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

#include "faultline/error.hpp"

namespace faultline::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorKind::io, "cannot format number");
  return std::string(buf, ptr);
}

void write_samples_csv(std::ostream& out, std::span<const RawSample> samples) {
  out << "t,value\n";
  for (const auto& s : samples) out << s.t << ',' << format_double(s.value) << '\n';
}

std::optional<RawSample> parse_sample_row(std::string_view row) {
  row = trim(row);
  const auto comma = row.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  const auto ts = trim(row.substr(0, comma));
  const auto vs = trim(row.substr(comma + 1));
  RawSample s;
  {
    const auto [p, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), s.t);
    if (ec != std::errc() || p != ts.data() + ts.size() || s.t < 0) return std::nullopt;
  }
  {
    const auto [p, ec] = std::from_chars(vs.data(), vs.data() + vs.size(), s.value);
    if (ec != std::errc() || p != vs.data() + vs.size() || !std::isfinite(s.value)) return std::nullopt;
  }
  return s;
}

SampleCsvReader::SampleCsvReader(std::istream& in) : in_(in) {
  std::string header;
  if (!std::getline(in_, header) || trim(header) != "t,value")
    throw Error(ErrorKind::parse, "sample CSV must start with the header 't,value'");
}

std::optional<SampleCsvReader::Row> SampleCsvReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    Row row;
    row.line = line_;
    row.sample = parse_sample_row(line);
    row.raw = std::move(line);
    return row;
  }
  return std::nullopt;
}

std::string event_to_json(const EventRecord& e) {
  ojson j;
  j["t"] = e.t;
  j["kind"] = std::string(to_string(e.kind));
  j["score"] = e.score;
  if (e.eta) j["eta"] = *e.eta;
  if (e.amplitude) j["amplitude"] = *e.amplitude;
  j["detail"] = e.detail;
  return j.dump();
}

EventRecord event_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    EventRecord e;
    e.t = j.at("t").get<std::int64_t>();
    const auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::parse, "unknown event kind");
    e.kind = *kind;
    e.score = j.at("score").get<double>();
    if (j.contains("eta")) e.eta = j.at("eta").get<double>();
    if (j.contains("amplitude")) e.amplitude = j.at("amplitude").get<double>();
    if (j.contains("detail")) e.detail = j.at("detail").get<std::string>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::parse, std::string("event line: ") + ex.what());
  }
}

std::vector<EventRecord> read_events(std::istream& in) {
  std::vector<EventRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(event_from_json(line));
  }
  return out;
}

std::string truth_to_json(const GroundTruth& truth) {
  ojson j = ojson::object();
  if (truth.has_fault) {
    j["fault_onset"] = truth.fault_onset;
    j["ramp"] = truth.ramp;
    j["echo_amp_max"] = truth.echo_amp_max;
    j["first_exceed"] = truth.first_exceed;
  }
  return j.dump(2);
}

GroundTruth truth_from_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw Error(ErrorKind::parse, "truth document must be a JSON object");
    GroundTruth g;
    if (!j.contains("fault_onset")) return g;
    g.has_fault = true;
    g.fault_onset = j.at("fault_onset").get<std::int64_t>();
    g.ramp = j.at("ramp").get<std::int64_t>();
    g.echo_amp_max = j.at("echo_amp_max").get<double>();
    g.first_exceed = j.at("first_exceed").get<std::int64_t>();
    return g;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::parse, std::string("truth document: ") + ex.what());
  }
}

EvalReport evaluate(std::span<const EventRecord> events, const GroundTruth& truth, double theta_amp,
                    std::int64_t eta_from) {
  EvalReport r;
  r.events_total = events.size();
  for (const auto& e : events) {
    if (!e.is_fault()) continue;
    if (!truth.has_fault || e.t < truth.fault_onset) {
      ++r.false_alarms;
      continue;
    }
    if (!r.detected) {
      r.detected = true;
      r.detection_delay = e.t - truth.first_exceed;
    }
  }

  const auto crossing = truth_crossing(truth, theta_amp);
  if (crossing) {
    double sum = 0.0;
    for (const auto& e : events) {
      if (e.kind != EventKind::fault_predicted || !e.eta) continue;
      if (e.t < eta_from || e.t >= *crossing) continue;
      const double remaining = static_cast<double>(*crossing - e.t);
      sum += std::abs(*e.eta - remaining) / remaining;
      ++r.eta_count;
    }
    if (r.eta_count > 0) r.eta_mape = 100.0 * sum / static_cast<double>(r.eta_count);
  }
  return r;
}

std::string report_to_json(const EvalReport& r) {
  ojson j;
  j["detected"] = r.detected;
  if (r.detection_delay) j["detection_delay"] = *r.detection_delay;
  j["false_alarms"] = r.false_alarms;
  if (r.eta_mape) j["eta_mape"] = *r.eta_mape;
  j["eta_count"] = r.eta_count;
  j["events_total"] = r.events_total;
  return j.dump();
}

}  // namespace faultline::cli
