#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "faultline/error.hpp"
#include "faultline/svm.hpp"
#include "test_util.hpp"

using namespace faultline;
using faultline::testing::random_points;
using faultline::testing::two_blobs;

namespace {

SvmParams rbf_params(double gamma, double c, std::size_t budget = 1000) {
  SvmParams p;
  p.kernel = {KernelKind::rbf, gamma};
  p.c = c;
  p.budget = budget;
  return p;
}

double max_gap(const SvmModel& a, const SvmModel& b, const std::vector<Point>& probes) {
  double m = 0.0;
  for (const auto& x : probes) m = std::max(m, std::abs(a.decision(x) - b.decision(x)));
  return m;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("kernel_eval") {
  const KernelSpec lin{KernelKind::linear, 1.0};
  const KernelSpec rbf{KernelKind::rbf, 1.0};
  CHECK(kernel_eval(lin, {1, 2, 0, 0}, {3, 1, 0, 0}) == doctest::Approx(5.0));
  CHECK(kernel_eval(rbf, {0.3, -1, 2, 5}, {0.3, -1, 2, 5}) == 1.0);
  CHECK(kernel_eval(rbf, {1, 0, 0, 0}, {0, 0, 0, 0}) == doctest::Approx(0.3678794).epsilon(1e-7));

  const auto pts = random_points(50, 3);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    CHECK(kernel_eval(rbf, pts[i], pts[i + 1]) == kernel_eval(rbf, pts[i + 1], pts[i]));
    CHECK(kernel_eval(lin, pts[i], pts[i + 1]) == kernel_eval(lin, pts[i + 1], pts[i]));
    const double k = kernel_eval(rbf, pts[i], pts[i + 1]);
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
  }
  CHECK(kind_of([] { KernelSpec{KernelKind::rbf, 0.0}.validate(); }) == ErrorKind::config);
}

TEST_CASE("decision of an empty model is zero") {
  SvmModel m(rbf_params(0.5, 10));
  CHECK(m.decision({1, 2, 3, 4}) == 0.0);
  CHECK(m.kkt_report(1e-6).empty());
}

TEST_CASE("analytic two-point linear SVM") {
  SvmParams p;
  p.kernel = {KernelKind::linear, 1.0};
  p.c = 10.0;

  SUBCASE("incremental") {
    SvmModel m(p);
    const auto a = m.learn_one({-1, 0, 0, 0}, Label::normal);
    const auto b = m.learn_one({1, 0, 0, 0}, Label::fault);
    CHECK(m.find(a)->alpha == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.find(b)->alpha == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(m.bias()) <= 1e-9);
    for (double v : {-2.0, -0.5, 0.0, 0.25, 3.0}) CHECK(std::abs(m.decision({v, 0, 0, 0}) - v) <= 1e-9);
    CHECK(m.kkt_report(1e-6).empty());
  }
  SUBCASE("batch") {
    const std::vector<LabeledPoint> data{{{-1, 0, 0, 0}, Label::normal}, {{1, 0, 0, 0}, Label::fault}};
    const SvmModel m = batch_train(data, p.kernel, p.c);
    for (const auto& tp : m.points()) CHECK(tp.alpha == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(m.bias()) <= 1e-9);
  }
}

TEST_CASE("a point already outside the margin enters the reserve set") {
  SvmModel m(rbf_params(0.5, 10));
  for (const auto& lp : two_blobs(40, 11)) m.learn_one(lp.x, lp.y);
  const auto probes = random_points(30, 12);
  std::vector<double> before;
  for (const auto& x : probes) before.push_back(m.decision(x));

  // Far on the fault side: y f(x) well above 1 once the model is confident.
  Point far{};
  double best = -1e9;
  for (const auto& x : random_points(500, 13, -4, 4)) {
    const double f = m.decision(x);
    if (f > best) {
      best = f;
      far = x;
    }
  }
  REQUIRE(best > 1.0);
  const auto id = m.learn_one(far, Label::fault);
  CHECK(m.find(id)->set == PointSet::reserve);
  for (std::size_t i = 0; i < probes.size(); ++i) CHECK(m.decision(probes[i]) == before[i]);
}

TEST_CASE("incremental training matches the batch solver") {
  const auto data = two_blobs(200, 7);
  const auto probes = random_points(100, 8);
  const SvmModel batch = batch_train(data, {KernelKind::rbf, 0.5}, 10.0);
  CHECK(batch.kkt_report(1e-6).empty());

  SvmModel inc(rbf_params(0.5, 10.0));
  for (const auto& lp : data) inc.learn_one(lp.x, lp.y);
  CHECK(inc.kkt_report(1e-6).empty());
  CHECK(max_gap(inc, batch, probes) <= 1e-5);

  SUBCASE("insertion order does not matter") {
    auto shuffled = data;
    std::mt19937_64 rng(99);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    SvmModel other(rbf_params(0.5, 10.0));
    for (const auto& lp : shuffled) other.learn_one(lp.x, lp.y);
    CHECK(max_gap(inc, other, probes) <= 1e-5);
  }
}

TEST_CASE("KKT holds after every update") {
  const auto data = two_blobs(150, 21, 1.0);
  SvmModel m(rbf_params(1.0, 5.0));
  for (const auto& lp : data) {
    m.learn_one(lp.x, lp.y);
    REQUIRE(m.kkt_report(1e-6).empty());
    REQUIRE(std::abs(m.dual_balance()) <= 1e-9);
  }
  std::mt19937_64 rng(5);
  for (int k = 0; k < 40; ++k) {
    const auto pts = m.points();
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    m.unlearn_one(pts[pick(rng)].id);
    REQUIRE(m.kkt_report(1e-6).empty());
    REQUIRE(std::abs(m.dual_balance()) <= 1e-9);
  }
}

TEST_CASE("linear kernel stays KKT-optimal on generic data") {
  SvmParams p;
  p.kernel = {KernelKind::linear, 1.0};
  p.c = 1.0;
  SvmModel m(p);
  const auto data = two_blobs(60, 4, 2.0);
  for (const auto& lp : data) {
    m.learn_one(lp.x, lp.y);
    REQUIRE(m.kkt_report(1e-6).empty());
  }
  CHECK(m.margin_size() <= kFeatureDim + 1);
}

TEST_CASE("unlearn") {
  const auto data = two_blobs(50, 31);
  const auto probes = random_points(60, 32);
  SvmModel m(rbf_params(0.5, 10.0));
  std::vector<std::int64_t> ids;
  for (const auto& lp : data) ids.push_back(m.learn_one(lp.x, lp.y));

  SUBCASE("a reserve point leaves the decision function unchanged") {
    const auto it = std::find_if(m.points().begin(), m.points().end(),
                                 [](const TrainedPoint& p) { return p.set == PointSet::reserve; });
    REQUIRE(it != m.points().end());
    std::vector<double> before;
    for (const auto& x : probes) before.push_back(m.decision(x));
    m.unlearn_one(it->id);
    // slot reordering only perturbs the summation order
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(std::abs(m.decision(probes[i]) - before[i]) <= 1e-12);
  }

  SUBCASE("a margin point: result equals batch retraining without it") {
    const auto it = std::find_if(m.points().begin(), m.points().end(),
                                 [](const TrainedPoint& p) { return p.set == PointSet::margin; });
    REQUIRE(it != m.points().end());
    const auto victim = it->id;
    m.unlearn_one(victim);
    CHECK(m.kkt_report(1e-6).empty());
    std::vector<LabeledPoint> rest;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (ids[i] != victim) rest.push_back(data[i]);
    const SvmModel batch = batch_train(rest, {KernelKind::rbf, 0.5}, 10.0);
    CHECK(max_gap(m, batch, probes) <= 1e-5);
  }

  SUBCASE("learn then unlearn restores the decision function") {
    std::vector<double> before;
    for (const auto& x : probes) before.push_back(m.decision(x));
    for (const auto& extra : two_blobs(20, 77)) {
      const auto id = m.learn_one(extra.x, extra.y);
      m.unlearn_one(id);
      REQUIRE(m.kkt_report(1e-6).empty());
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) gap = std::max(gap, std::abs(m.decision(probes[i]) - before[i]));
    CHECK(gap <= 1e-6);
  }

  SUBCASE("unknown id") { CHECK(kind_of([&] { m.unlearn_one(123456); }) == ErrorKind::not_found); }
}

TEST_CASE("kkt_report flags a hand-built violation") {
  SvmParams p;
  p.kernel = {KernelKind::linear, 1.0};
  p.c = 1.0;
  // alpha = 0 with f = 0.5 for a fault point: g = 0.5 - 1 = -0.5.
  const SvmModel m = SvmModel::from_solution(p, 0.5, {{7, {1, 0, 0, 0}, Label::fault, 0.0, PointSet::reserve}});
  const auto v = m.kkt_report(1e-6);
  REQUIRE(v.size() == 1);
  CHECK(v[0].id == 7);
  CHECK(v[0].g == doctest::Approx(-0.5));
  CHECK(v[0].expected_set == PointSet::reserve);
}

TEST_CASE("input validation") {
  SvmModel m(rbf_params(0.5, 1.0));
  CHECK(kind_of([&] { m.learn_one({1, NAN, 0, 0}, Label::fault); }) == ErrorKind::input);
  CHECK(m.empty());
  const std::vector<LabeledPoint> one_class{{{1, 0, 0, 0}, Label::fault}, {{1, 0, 0, 0}, Label::fault}};
  CHECK(kind_of([&] { batch_train(one_class, {KernelKind::rbf, 1.0}, 1.0); }) == ErrorKind::training);
}

TEST_CASE("single-class stream keeps a valid model") {
  SvmModel m(rbf_params(0.5, 1.0));
  for (const auto& x : random_points(10, 41)) {
    m.learn_one(x, Label::normal);
    CHECK(m.kkt_report(1e-6).empty());
  }
  CHECK(m.decision({0, 0, 0, 0}) < 0.0);
}

TEST_CASE("batch solver separates separable blobs with a large C") {
  const auto data = two_blobs(80, 51, 8.0, 0.5);
  const SvmModel m = batch_train(data, {KernelKind::rbf, 0.1}, 1000.0);
  for (const auto& lp : data) CHECK(label_from_sign(m.decision(lp.x)) == lp.y);
}

TEST_CASE("budget eviction keeps the model bounded and optimal") {
  SvmModel m(rbf_params(0.5, 10.0, 25));
  const auto data = two_blobs(120, 61);
  for (const auto& lp : data) {
    const auto prev_ids = [&] {
      std::vector<std::int64_t> v;
      for (const auto& p : m.points()) v.push_back(p.id);
      return v;
    }();
    const bool full = m.size() == 25;
    const std::int64_t oldest_reserve = [&] {
      std::int64_t best = -1;
      for (const auto& p : m.points())
        if (p.set == PointSet::reserve && (best < 0 || p.id < best)) best = p.id;
      return best;
    }();
    m.learn_one(lp.x, lp.y);
    REQUIRE(m.size() <= 25);
    REQUIRE(m.kkt_report(1e-6).empty());
    if (full) {
      REQUIRE(m.last_evicted().has_value());
      if (oldest_reserve >= 0) CHECK(*m.last_evicted() == oldest_reserve);
      CHECK(std::find(prev_ids.begin(), prev_ids.end(), *m.last_evicted()) != prev_ids.end());
    }
  }
}

TEST_CASE("checkpoint round trip") {
  SvmModel m(rbf_params(0.5, 10.0));
  for (const auto& lp : two_blobs(60, 71)) m.learn_one(lp.x, lp.y);
  std::stringstream ss;
  save_checkpoint(m, ss);
  const SvmModel back = load_checkpoint(ss);
  CHECK(back.kkt_report(1e-6).empty());
  CHECK(back.size() == m.size());
  CHECK(back.bias() == m.bias());
  for (const auto& x : random_points(40, 72)) CHECK(back.decision(x) == m.decision(x));

  std::stringstream bad("faultline-svm 9\n");
  CHECK(kind_of([&] { load_checkpoint(bad); }) == ErrorKind::parse);
  std::stringstream truncated("faultline-svm 1\nkernel rbf 0.5\nc 1\nepsilon 1e-6\nbudget 5\nbias 0\npoints 2\n1 1 0.5 0 0 0 0\n");
  CHECK(kind_of([&] { load_checkpoint(truncated); }) == ErrorKind::parse);
}
