#include "cli/commands.hpp"

#include <fstream>

#include <json.hpp>

#include "cli/config.hpp"
#include "cli/formats.hpp"
#include "faultline/error.hpp"

namespace faultline::cli {

namespace {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::io: return kExitIo;
    case ErrorKind::insufficient_data:
    case ErrorKind::calibration: return kExitInsufficientData;
    case ErrorKind::stream: return kExitCorruptStream;
    default: return kExitConfig;
  }
}

AppConfig resolve_config(const std::optional<path>& config, std::optional<std::uint64_t> seed) {
  AppConfig cfg = config ? load_config(*config) : AppConfig{};
  if (seed) cfg.set_seed(*seed);
  return cfg;
}

std::ifstream open_in(const path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::io, "cannot open " + p.string());
  return in;
}

std::ofstream open_out(const path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
  return out;
}

template <typename Body>
int guarded(CommandIo io, const char* name, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    io.err << name << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    io.err << name << ": " << e.what() << '\n';
    return kExitConfig;
  }
}

struct RunStats {
  std::size_t rows = 0;
  std::size_t malformed = 0;
};

// Streams the CSV through the engine, handing every event to sink.
template <typename Sink>
RunStats drive(Engine& engine, std::istream& in, Sink&& sink) {
  SampleCsvReader reader(in);
  RunStats st;
  std::int64_t last_t = 0;
  while (auto row = reader.next()) {
    ++st.rows;
    if (!row->sample) {
      ++st.malformed;
      sink(EventRecord{last_t, EventKind::stream_error, 0.0, std::nullopt, std::nullopt,
                       "malformed row at line " + std::to_string(row->line)});
      continue;
    }
    for (const auto& e : engine.ingest(*row->sample)) sink(e);
    if (auto t = row->sample->t; t > last_t) last_t = t;
  }
  return st;
}

bool too_corrupt(const RunStats& st) { return st.malformed * 10 > st.rows; }

}  // namespace

int cmd_simulate(const std::optional<path>& config, const path& out_csv, const path& truth_json,
                 std::optional<std::uint64_t> seed, CommandIo io) {
  return guarded(io, "simulate", [&] {
    const AppConfig cfg = resolve_config(config, seed);
    const SimOutput sim = generate(cfg.sim);
    {
      auto out = open_out(out_csv);
      write_samples_csv(out, sim.samples);
      if (!out.flush()) throw Error(ErrorKind::io, "write failed: " + out_csv.string());
    }
    {
      auto out = open_out(truth_json);
      out << truth_to_json(sim.truth) << '\n';
      if (!out.flush()) throw Error(ErrorKind::io, "write failed: " + truth_json.string());
    }
    return kExitOk;
  });
}

int cmd_run(const std::optional<path>& config, const path& in_csv, const path& events_jsonl,
            std::optional<std::uint64_t> seed, CommandIo io) {
  return guarded(io, "run", [&] {
    const AppConfig cfg = resolve_config(config, seed);
    Engine engine(cfg.engine);
    auto in = open_in(in_csv);
    auto out = open_out(events_jsonl);
    const RunStats st = drive(engine, in, [&out](const EventRecord& e) { out << event_to_json(e) << '\n'; });
    if (!out.flush()) throw Error(ErrorKind::io, "write failed: " + events_jsonl.string());
    if (too_corrupt(st)) {
      io.err << "run: " << st.malformed << " of " << st.rows << " rows malformed\n";
      return kExitCorruptStream;
    }
    return kExitOk;
  });
}

int cmd_eval(const path& events_jsonl, const path& truth_json, std::optional<double> theta_amp, CommandIo io) {
  return guarded(io, "eval", [&] {
    std::vector<EventRecord> events;
    GroundTruth truth;
    {
      auto in = open_in(events_jsonl);
      events = read_events(in);
    }
    {
      auto in = open_in(truth_json);
      truth = truth_from_json(in);
    }
    const double theta = theta_amp.value_or(0.5 * truth.echo_amp_max);
    io.out << report_to_json(evaluate(events, truth, theta)) << '\n';
    return kExitOk;
  });
}

int cmd_tune(const std::optional<path>& config, const path& in_csv, std::optional<std::uint64_t> seed,
             CommandIo io) {
  return guarded(io, "tune", [&] {
    const AppConfig cfg = resolve_config(config, seed);
    Engine engine(cfg.engine);
    auto in = open_in(in_csv);
    const RunStats st = drive(engine, in, [](const EventRecord&) {});
    if (too_corrupt(st)) {
      io.err << "tune: " << st.malformed << " of " << st.rows << " rows malformed\n";
      return kExitCorruptStream;
    }
    if (engine.phase() == Phase::calibrating) {
      io.err << "tune: stream too short to finish calibration\n";
      return kExitInsufficientData;
    }
    const auto buffer = engine.labeled_buffer();
    const TuneResult r = grid_search(buffer, cfg.engine.grid, cfg.engine.svm.kernel.kind);
    nlohmann::ordered_json j;
    j["c"] = r.c;
    j["gamma"] = r.gamma;
    j["cv_accuracy"] = r.cv_accuracy;
    io.out << j.dump() << '\n';
    return kExitOk;
  });
}

}  // namespace faultline::cli
