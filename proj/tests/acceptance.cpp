// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 when the set of
// failing criteria equals the set passed with --expect-fail (empty by default).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/formats.hpp"
#include "faultline/conditioning.hpp"
#include "faultline/engine.hpp"
#include "faultline/sim.hpp"
#include "faultline/som.hpp"
#include "faultline/svm.hpp"
#include "test_util.hpp"

using namespace faultline;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct ScratchDir {
  fs::path root;
  explicit ScratchDir(const std::string& tag) {
    root = fs::temp_directory_path() / ("faultline_accept_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(root);
  }
  ~ScratchDir() { fs::remove_all(root); }
  fs::path operator/(const std::string& name) const { return root / name; }
};

std::vector<Point> probes(std::size_t n, std::uint64_t seed) { return testing::random_points(n, seed, -2.5, 2.5); }

double max_gap(const SvmModel& a, const SvmModel& b, std::span<const Point> at) {
  double worst = 0.0;
  for (const auto& p : at) worst = std::max(worst, std::abs(a.decision(p) - b.decision(p)));
  return worst;
}

// 1. incremental training reaches the batch optimum, in any insertion order
Outcome incremental_equals_batch() {
  const auto t0 = Clock::now();
  const auto data = testing::two_blobs(200, 11);
  const auto at = probes(100, 12);
  const KernelSpec k{KernelKind::rbf, 0.5};
  const auto batch = batch_train(data, k, 10.0, 1e-10);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(13);
  double worst = 0.0;
  for (int perm = 0; perm <= 5; ++perm) {  // arrival order, then 5 shuffles
    if (perm > 0) std::shuffle(order.begin(), order.end(), rng);
    SvmModel m(SvmParams{k, 10.0, 1e-6, 400});
    for (auto i : order) m.learn_one(data[i].x, data[i].y);
    worst = std::max(worst, max_gap(m, batch, at));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs <= 10.0,
          "max |f_inc - f_batch| = " + fmt("%.3g", worst) + " over 6 orders, " + fmt("%.2f", secs) + " s"};
}

// 2. every stored point stays in its KKT case after each update
Outcome kkt_maintained() {
  const auto t0 = Clock::now();
  const auto data = testing::two_blobs(600, 21);
  SvmModel m(SvmParams{KernelSpec{KernelKind::rbf, 0.5}, 10.0, 1e-6, 600});
  std::vector<std::int64_t> ids;
  std::size_t violations = 0, calls = 0;
  auto check = [&] {
    ++calls;
    if (!m.kkt_report(1e-6).empty()) ++violations;
  };
  for (std::size_t i = 0; i < 500; ++i) {
    ids.push_back(m.learn_one(data[i].x, data[i].y));
    check();
  }
  std::mt19937_64 rng(22);
  for (std::size_t i = 0; i < 100; ++i) {
    const std::size_t pick = rng() % ids.size();
    m.unlearn_one(ids[pick]);
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(pick));
    check();
    ids.push_back(m.learn_one(data[500 + i].x, data[500 + i].y));
    check();
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs <= 30.0,
          std::to_string(violations) + " of " + std::to_string(calls) + " states with violations, " +
              fmt("%.2f", secs) + " s"};
}

// 3. learn followed by unlearn is the identity on the decision function
Outcome reversible() {
  const auto data = testing::two_blobs(150, 31);
  const auto at = probes(200, 32);
  SvmModel m(SvmParams{KernelSpec{KernelKind::rbf, 0.5}, 10.0, 1e-6, 400});
  for (std::size_t i = 0; i < 100; ++i) m.learn_one(data[i].x, data[i].y);
  const SvmModel before = m;

  double worst = 0.0;
  for (std::size_t i = 100; i < 150; ++i) {  // one at a time
    const auto id = m.learn_one(data[i].x, data[i].y);
    m.unlearn_one(id);
    worst = std::max(worst, max_gap(m, before, at));
  }
  std::vector<std::int64_t> ids;  // all 50, then all back out
  for (std::size_t i = 100; i < 150; ++i) ids.push_back(m.learn_one(data[i].x, data[i].y));
  for (auto id : ids) m.unlearn_one(id);
  worst = std::max(worst, max_gap(m, before, at));
  return {worst <= 1e-6, "max decision drift " + fmt("%.3g", worst)};
}

// 4. closed-form dual of two mirrored points
Outcome analytic_two_point() {
  double worst = 0.0;
  for (int order = 0; order < 2; ++order) {
    SvmModel m(SvmParams{KernelSpec{KernelKind::linear, 0.5}, 10.0, 1e-6, 400});
    const Point pos{1, 0, 0, 0}, neg{-1, 0, 0, 0};
    if (order == 0) {
      m.learn_one(pos, Label::fault);
      m.learn_one(neg, Label::normal);
    } else {
      m.learn_one(neg, Label::normal);
      m.learn_one(pos, Label::fault);
    }
    for (const auto& p : m.points()) worst = std::max(worst, std::abs(p.alpha - 0.5));
    worst = std::max(worst, std::abs(m.bias()));
    for (double v = -3.0; v <= 3.0; v += 0.25) worst = std::max(worst, std::abs(m.decision({v, 0, 0, 0}) - v));
  }
  return {worst <= 1e-9, "max error in alpha, b, f = " + fmt("%.3g", worst)};
}

// 5. Riccati fixed point of the scalar filter
Outcome kalman_fixed_point() {
  KalmanFilter k(1.0, 1.0);
  std::mt19937_64 rng(51);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int i = 0; i < 100; ++i) k.step(z(rng));
  const double err = std::abs(k.state().last_p_pred - (1.0 + std::sqrt(5.0)) / 2.0);
  return {err <= 1e-9, "|P_pred - (1+sqrt5)/2| = " + fmt("%.3g", err)};
}

std::vector<Point> three_blobs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Point centres[3] = {{0, 0, 0, 0}, {4, 4, 0, 0}, {0, 4, 4, -4}};
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    Point p = centres[i % 3];
    for (auto& v : p) v += noise(rng);
    out.push_back(p);
  }
  return out;
}

// 6. BMU search against a brute-force scan; fitting lowers the mean QE
Outcome som_oracle() {
  std::mt19937_64 rng(61);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SomConfig cfg;
    cfg.grid = 1 + rng() % 8;
    SomModel m(cfg);
    for (auto& w : m.codebook()) w = testing::random_points(1, rng())[0];
    const Point x = testing::random_points(1, rng())[0];
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t u = 0; u < m.units(); ++u) {
      double d = 0.0;
      for (std::size_t j = 0; j < kFeatureDim; ++j) d += (m.codebook()[u][j] - x[j]) * (m.codebook()[u][j] - x[j]);
      if (d < best_d) best_d = d, best = u;
    }
    const auto b = m.bmu(x);
    if (b.row * cfg.grid + b.col != best) ++mismatches;
  }

  const auto data = three_blobs(300, 8);
  std::size_t improved = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SomConfig cfg;
    cfg.grid = 4;
    cfg.seed = seed;
    SomModel init(cfg);
    init.initialize(data);
    SomModel fitted(cfg);
    fitted.fit(data);
    improved += mean_quantization_error(fitted, data) < mean_quantization_error(init, data);
  }
  return {mismatches == 0 && improved == 5,
          std::to_string(mismatches) + " BMU mismatches in 1000; QE improved for " + std::to_string(improved) +
              "/5 seeds (4x4 grid)"};
}

struct RunFiles {
  fs::path csv, truth, events;
  int simulate_rc = -1, run_rc = -1;
};

RunFiles simulate_and_run(const ScratchDir& dir, const std::string& tag, const std::string& config_text) {
  RunFiles f{dir / (tag + ".csv"), dir / (tag + ".json"), dir / (tag + ".jsonl")};
  const auto cfg = dir / (tag + ".cfg");
  std::ofstream(cfg) << config_text;
  std::ostringstream out, err;
  f.simulate_rc = cli::cmd_simulate(cfg, f.csv, f.truth, std::nullopt, {out, err});
  f.run_rc = cli::cmd_run(cfg, f.csv, f.events, std::nullopt, {out, err});
  return f;
}

std::vector<EventRecord> events_of(const fs::path& p) {
  std::ifstream in(p);
  return cli::read_events(in);
}

// Compares an event stream with its frozen copy, writing the copy when absent.
std::string check_fixture(const fs::path& fixture_dir, const std::string& name, const fs::path& produced,
                          bool& ok) {
  const auto frozen = fixture_dir / name;
  if (!fs::exists(frozen)) {
    fs::create_directories(fixture_dir);
    fs::copy_file(produced, frozen);
    return name + " frozen now";
  }
  if (read_file(frozen) == read_file(produced)) return name + " matches";
  ok = false;
  return name + " DIFFERS from the frozen copy";
}

// 7. end-to-end detection on the default rig
Outcome end_to_end(const fs::path& fixture_dir) {
  const auto t0 = Clock::now();
  ScratchDir dir("e2e");
  const auto fault = simulate_and_run(dir, "fault", "seed = 42\n");
  const auto clean = simulate_and_run(dir, "clean", "seed = 42\nsim.echo_amp_max = 0\n");
  if (fault.simulate_rc || fault.run_rc || clean.simulate_rc || clean.run_rc) return {false, "a command failed"};

  std::ifstream tin(fault.truth);
  const auto truth = cli::truth_from_json(tin);
  const double theta_amp = 0.5 * truth.echo_amp_max;
  const auto crossing = truth_crossing(truth, theta_amp);
  if (!crossing) return {false, "ground truth never crosses the threshold"};

  const auto events = events_of(fault.events);
  const auto first_fault = std::find_if(events.begin(), events.end(), [](const auto& e) { return e.is_fault(); });
  const bool in_time = first_fault != events.end() && first_fault->t <= *crossing;

  // eta is scored over the later half of the run-up to the crossing
  const std::int64_t eta_from = truth.fault_onset + (*crossing - truth.fault_onset) / 2;
  const auto report = cli::evaluate(events, truth, theta_amp, eta_from);
  const bool eta_ok = report.eta_mape && *report.eta_mape <= 25.0;

  const auto clean_events = events_of(clean.events);
  const auto clean_faults =
      std::count_if(clean_events.begin(), clean_events.end(), [](const auto& e) { return e.is_fault(); });

  bool fixtures_ok = true;
  const auto fx = check_fixture(fixture_dir, "seed42_fault.jsonl", fault.events, fixtures_ok) + ", " +
                  check_fixture(fixture_dir, "seed42_clean.jsonl", clean.events, fixtures_ok);

  const double secs = seconds_since(t0);
  std::string detail = "first fault event t=" +
                       (first_fault == events.end() ? std::string("none") : std::to_string(first_fault->t)) +
                       " vs crossing " + std::to_string(*crossing) + (in_time ? " (ok)" : " (late)") +
                       "; eta_mape " + (report.eta_mape ? fmt("%.1f", *report.eta_mape) + " %" : "n/a") + " over " +
                       std::to_string(report.eta_count) + " predictions (limit 25 %)" +
                       "; fault-free run: " + std::to_string(clean_faults) + " fault events; " + fx + "; " +
                       fmt("%.2f", secs) + " s";
  return {in_time && eta_ok && clean_faults == 0 && fixtures_ok && secs <= 60.0, detail};
}

// 8. identical config and seed give byte-identical outputs
Outcome deterministic() {
  ScratchDir dir("det");
  const auto a = simulate_and_run(dir, "a", "seed = 7\n");
  const auto b = simulate_and_run(dir, "b", "seed = 7\n");
  if (a.simulate_rc || a.run_rc || b.simulate_rc || b.run_rc) return {false, "a command failed"};
  const bool csv = read_file(a.csv) == read_file(b.csv);
  const bool truth = read_file(a.truth) == read_file(b.truth);
  const bool events = read_file(a.events) == read_file(b.events);
  return {csv && truth && events, std::string("csv ") + (csv ? "identical" : "differ") + ", truth " +
                                      (truth ? "identical" : "differ") + ", events " +
                                      (events ? "identical" : "differ") + " (" +
                                      std::to_string(fs::file_size(a.events)) + " event bytes)"};
}

// 9. engine state stays within its configured bounds
Outcome bounded_memory() {
  const auto t0 = Clock::now();
  SimConfig sim;
  sim.total_samples = 1'000'000;
  const auto stream = generate(sim);
  const EngineConfig cfg;
  Engine e(cfg);
  EngineFootprint peak;
  std::size_t breaches = 0;
  for (const auto& s : stream.samples) {
    e.ingest(s);
    const auto fp = e.footprint();
    if (fp.svm_points > cfg.svm.budget || fp.labeled_buffer > cfg.svm.budget || fp.score_history > cfg.trend_window ||
        fp.frame_buffer > cfg.frame_length || fp.calibration_buffer > cfg.calib_frames)
      ++breaches;
    peak.svm_points = std::max(peak.svm_points, fp.svm_points);
    peak.labeled_buffer = std::max(peak.labeled_buffer, fp.labeled_buffer);
    peak.score_history = std::max(peak.score_history, fp.score_history);
    peak.frame_buffer = std::max(peak.frame_buffer, fp.frame_buffer);
    peak.calibration_buffer = std::max(peak.calibration_buffer, fp.calibration_buffer);
  }
  return {breaches == 0,
          std::to_string(stream.samples.size()) + " samples, " + std::to_string(breaches) +
              " breaches; peaks svm " + std::to_string(peak.svm_points) + "/" + std::to_string(cfg.svm.budget) +
              ", labeled " + std::to_string(peak.labeled_buffer) + "/" + std::to_string(cfg.svm.budget) +
              ", history " + std::to_string(peak.score_history) + "/" + std::to_string(cfg.trend_window) +
              ", frame " + std::to_string(peak.frame_buffer) + "/" + std::to_string(cfg.frame_length) +
              ", calibration " + std::to_string(peak.calibration_buffer) + "/" +
              std::to_string(cfg.calib_frames) + "; " + fmt("%.2f", seconds_since(t0)) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"faultline acceptance suite"};
  std::vector<int> expect_fail;
  std::string fixture_dir = FAULTLINE_FIXTURE_DIR;
  std::vector<int> only;
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail (repeatable)")->check(CLI::Range(1, 9));
  app.add_option("--fixtures", fixture_dir, "Directory holding the frozen event streams");
  app.add_option("--only", only, "Run just these criteria")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{
      incremental_equals_batch, kkt_maintained, reversible, analytic_two_point, kalman_fixed_point, som_oracle,
      [&] { return end_to_end(fixture_dir); }, deterministic, bounded_memory};

  std::set<int> failed;
  for (int i = 1; i <= 9; ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), i) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i - 1]();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    if (!o.pass) failed.insert(i);
    std::cout << "criterion " << i << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  }

  std::set<int> expected;
  for (int i : expect_fail)
    if (only.empty() || std::find(only.begin(), only.end(), i) != only.end()) expected.insert(i);
  if (failed == expected) {
    if (!expected.empty()) std::cout << "failures match the expected list" << std::endl;
    return 0;
  }
  std::cout << "failures differ from the expected list" << std::endl;
  return 1;
}
