#include "faultline/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "faultline/error.hpp"

namespace faultline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// A pivot below this means adding the point to the margin set would make
// the bordered system singular.
constexpr double kPivotFloor = 1e-12;
constexpr double kResidualLimit = 1e-8;

enum class Event {
  none,
  moving_to_margin,   // moving point reaches g = 0
  moving_to_error,    // moving point reaches alpha = C
  moving_done,        // moving point reaches alpha = 0 (decrement)
  margin_to_error,
  margin_to_reserve,
  enter_margin,       // error or reserve point reaches g = 0
};

struct Breakpoint {
  double step = kInf;
  Event event = Event::none;
  std::size_t slot = 0;
  std::int64_t id = std::numeric_limits<std::int64_t>::max();

  // Smallest step wins; exact ties go to the lowest point id.
  void offer(double s, Event e, std::size_t sl, std::int64_t pid) {
    s = std::max(s, 0.0);
    if (s < step || (s == step && pid < id)) {
      step = s;
      event = e;
      slot = sl;
      id = pid;
    }
  }
};

}  // namespace

std::optional<KernelKind> parse_kernel_kind(std::string_view s) {
  if (s == "linear") return KernelKind::linear;
  if (s == "rbf") return KernelKind::rbf;
  return std::nullopt;
}

std::string_view to_string(KernelKind k) { return k == KernelKind::linear ? "linear" : "rbf"; }

std::string_view to_string(PointSet s) {
  switch (s) {
    case PointSet::margin: return "margin";
    case PointSet::error: return "error";
    case PointSet::reserve: return "reserve";
  }
  return "reserve";
}

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(gamma > 0.0 && std::isfinite(gamma)))
    throw Error(ErrorKind::config, "rbf gamma must be > 0");
}

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& z) {
  if (spec.kind == KernelKind::linear) {
    double d = 0.0;
    for (std::size_t i = 0; i < kFeatureDim; ++i) d += x[i] * z[i];
    return d;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    const double e = x[i] - z[i];
    d2 += e * e;
  }
  return std::exp(-spec.gamma * d2);
}

void SvmParams::validate() const {
  kernel.validate();
  if (!(c > 0.0 && std::isfinite(c))) throw Error(ErrorKind::config, "svm.c must be > 0");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::config, "svm.epsilon must be > 0");
  if (budget == 0) throw Error(ErrorKind::config, "svm.budget must be > 0");
}

SvmModel::SvmModel(SvmParams params) : params_(params) { params_.validate(); }

SvmModel SvmModel::from_solution(SvmParams params, double bias, std::vector<TrainedPoint> points) {
  SvmModel m(params);
  if (points.size() > m.params_.budget) {
    m.params_.budget = points.size();
  }
  m.bias_ = bias;
  for (auto& p : points) {
    for (double v : p.x)
      if (!std::isfinite(v)) throw Error(ErrorKind::input, "non-finite feature in solution");
    if (m.find(p.id) != nullptr)
      throw Error(ErrorKind::input, "duplicate point id " + std::to_string(p.id));
    const std::size_t slot = m.append_slot(p.x, p.y, p.id);
    auto& tp = m.points_[slot];
    tp.alpha = std::clamp(p.alpha, 0.0, m.params_.c);
    if (tp.alpha <= 0.0) {
      tp.set = PointSet::reserve;
    } else if (tp.alpha >= m.params_.c) {
      tp.set = PointSet::error;
    } else {
      tp.set = PointSet::margin;
      m.margin_.push_back(slot);
    }
    m.next_id_ = std::max(m.next_id_, p.id + 1);
  }
  m.rebuild_inverse();
  m.recompute_residuals();
  return m;
}

const TrainedPoint* SvmModel::find(std::int64_t id) const {
  for (const auto& p : points_)
    if (p.id == id) return &p;
  return nullptr;
}

bool SvmModel::has_class(Label y) const {
  return std::any_of(points_.begin(), points_.end(), [y](const TrainedPoint& p) { return p.y == y; });
}

double SvmModel::dual_balance() const {
  double s = 0.0;
  for (const auto& p : points_) s += p.alpha * label_sign(p.y);
  return s;
}

double SvmModel::decision(const Point& x) const {
  double f = bias_;
  for (const auto& p : points_) {
    if (p.alpha > 0.0) f += p.alpha * label_sign(p.y) * kernel_eval(params_.kernel, p.x, x);
  }
  return f;
}

std::vector<KktViolation> SvmModel::kkt_report(double eps) const {
  std::vector<KktViolation> out;
  for (const auto& p : points_) {
    const double g = label_sign(p.y) * decision(p.x) - 1.0;
    bool ok = true;
    switch (p.set) {
      case PointSet::margin: ok = p.alpha > 0.0 && p.alpha < params_.c && std::abs(g) <= eps; break;
      case PointSet::error: ok = p.alpha == params_.c && g <= eps; break;
      case PointSet::reserve: ok = p.alpha == 0.0 && g >= -eps; break;
    }
    if (!ok) out.push_back({p.id, g, p.set});
  }
  return out;
}

std::size_t SvmModel::slot_of(std::int64_t id) const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].id == id) return i;
  throw Error(ErrorKind::not_found, "no stored point with id " + std::to_string(id));
}

void SvmModel::ensure_capacity(std::size_t n) {
  if (static_cast<std::size_t>(gram_.rows()) >= n) return;
  const auto old = static_cast<Eigen::Index>(points_.size());
  const auto cap = static_cast<Eigen::Index>(std::max<std::size_t>(n, params_.budget + 1));
  Eigen::MatrixXd bigger(cap, cap);
  bigger.topLeftCorner(old, old) = gram_.topLeftCorner(old, old);
  gram_.swap(bigger);
}

std::size_t SvmModel::append_slot(const Point& x, Label y, std::int64_t id) {
  const std::size_t slot = points_.size();
  ensure_capacity(slot + 1);
  points_.push_back({id, x, y, 0.0, PointSet::reserve});
  g_.push_back(0.0);
  const auto s = static_cast<Eigen::Index>(slot);
  for (std::size_t j = 0; j <= slot; ++j) {
    const double k = kernel_eval(params_.kernel, points_[j].x, x);
    gram_(s, static_cast<Eigen::Index>(j)) = k;
    gram_(static_cast<Eigen::Index>(j), s) = k;
  }
  return slot;
}

// Removes a slot whose coefficient is zero and which is not in the margin
// set. The last slot is moved into its place.
void SvmModel::remove_slot(std::size_t slot) {
  const std::size_t last = points_.size() - 1;
  if (slot != last) {
    points_[slot] = points_[last];
    g_[slot] = g_[last];
    const auto s = static_cast<Eigen::Index>(slot);
    const auto l = static_cast<Eigen::Index>(last);
    const auto n = static_cast<Eigen::Index>(points_.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      gram_(s, j) = gram_(l, j);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      gram_(j, s) = gram_(s, j);
    }
    gram_(s, s) = gram_(l, l);
    for (auto& m : margin_)
      if (m == last) m = slot;
  }
  points_.pop_back();
  g_.pop_back();
}

SvmModel::Snapshot SvmModel::snapshot() const {
  return {points_, g_, margin_, inverse_, bias_};
}

// Slots present in the snapshot keep their kernel rows: a path only ever
// appends a slot, and removals happen after it succeeds.
void SvmModel::restore(Snapshot&& s) {
  points_ = std::move(s.points);
  g_ = std::move(s.g);
  margin_ = std::move(s.margin);
  inverse_ = std::move(s.inverse);
  bias_ = s.bias;
}

void SvmModel::recompute_residuals() {
  const auto n = points_.size();
  std::vector<double> f(n, bias_);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = points_[j].alpha;
    if (a == 0.0) continue;
    const double ay = a * y_of(j);
    const auto jj = static_cast<Eigen::Index>(j);
    for (std::size_t i = 0; i < n; ++i) f[i] += ay * gram_(static_cast<Eigen::Index>(i), jj);
  }
  for (std::size_t i = 0; i < n; ++i) g_[i] = y_of(i) * f[i] - 1.0;
}

void SvmModel::rebuild_inverse() {
  const auto l = static_cast<Eigen::Index>(margin_.size());
  if (l == 0) {
    inverse_.resize(0, 0);
    return;
  }
  Eigen::MatrixXd m(l + 1, l + 1);
  m(0, 0) = 0.0;
  for (Eigen::Index a = 0; a < l; ++a) {
    const std::size_t sa = margin_[static_cast<std::size_t>(a)];
    m(0, a + 1) = y_of(sa);
    m(a + 1, 0) = y_of(sa);
    for (Eigen::Index b = 0; b < l; ++b) m(a + 1, b + 1) = q(sa, margin_[static_cast<std::size_t>(b)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw Error(ErrorKind::solver, "margin-set system is singular");
  inverse_ = lu.inverse();
}

// Borders the inverse with a new margin point.
void SvmModel::margin_insert(std::size_t slot) {
  const double yk = y_of(slot);
  if (margin_.empty()) {
    inverse_.resize(2, 2);
    inverse_ << -q(slot, slot), yk, yk, 0.0;
    margin_.push_back(slot);
    points_[slot].set = PointSet::margin;
    return;
  }
  const auto l = static_cast<Eigen::Index>(margin_.size());
  Eigen::VectorXd v(l + 1);
  v(0) = yk;
  for (Eigen::Index a = 0; a < l; ++a) v(a + 1) = q(margin_[static_cast<std::size_t>(a)], slot);
  Eigen::VectorXd beta = -(inverse_ * v);
  const double pivot = q(slot, slot) + v.dot(beta);
  if (!(std::abs(pivot) > kPivotFloor)) {
    throw Error(ErrorKind::solver, "adding point " + std::to_string(points_[slot].id) +
                                       " makes the margin system singular");
  }
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(l + 2, l + 2);
  grown.topLeftCorner(l + 1, l + 1) = inverse_;
  Eigen::VectorXd u(l + 2);
  u.head(l + 1) = beta;
  u(l + 1) = 1.0;
  grown.noalias() += (u * u.transpose()) / pivot;
  inverse_.swap(grown);
  margin_.push_back(slot);
  points_[slot].set = PointSet::margin;
}

void SvmModel::margin_erase(std::size_t pos) {
  const auto l = static_cast<Eigen::Index>(margin_.size());
  margin_.erase(margin_.begin() + static_cast<std::ptrdiff_t>(pos));
  if (l == 1) {
    inverse_.resize(0, 0);
    return;
  }
  const auto k = static_cast<Eigen::Index>(pos) + 1;
  const double rkk = inverse_(k, k);
  if (!(std::abs(rkk) > kPivotFloor)) {
    rebuild_inverse();
    return;
  }
  Eigen::MatrixXd next(l, l);
  for (Eigen::Index i = 0, ni = 0; i <= l; ++i) {
    if (i == k) continue;
    for (Eigen::Index j = 0, nj = 0; j <= l; ++j) {
      if (j == k) continue;
      next(ni, nj) = inverse_(i, j) - inverse_(i, k) * inverse_(k, j) / rkk;
      ++nj;
    }
    ++ni;
  }
  inverse_.swap(next);
}

// Moves the coefficient of slot c (direction +1: grow from its current value
// until the point satisfies KKT; -1: shrink to zero) while every other point
// stays in its KKT case. Points migrate between sets at breakpoints.
void SvmModel::run_path(std::size_t c, int direction) {
  const double dir = static_cast<double>(direction);
  const double cap_c = params_.c;
  const double yc = y_of(c);
  const std::size_t n = points_.size();
  const std::size_t max_iter = 100 * std::max<std::size_t>(n, 1);

  std::vector<double> rate_g(n, 0.0);
  Eigen::VectorXd beta;

  for (std::size_t iter = 0;; ++iter) {
    if (iter >= max_iter) {
      throw Error(ErrorKind::solver, "iteration cap reached while updating point " +
                                         std::to_string(points_[c].id));
    }
    const bool bias_only = margin_.empty();
    const auto l = static_cast<Eigen::Index>(margin_.size());
    double rate_alpha_c = 0.0;
    double rate_b = 0.0;

    // Rates per unit step of the path parameter.
    if (bias_only) {
      rate_b = dir * yc;
      for (std::size_t i = 0; i < n; ++i) rate_g[i] = y_of(i) * rate_b;
    } else {
      rate_alpha_c = dir;
      Eigen::VectorXd v(l + 1);
      v(0) = yc;
      for (Eigen::Index a = 0; a < l; ++a) v(a + 1) = q(margin_[static_cast<std::size_t>(a)], c);
      beta = -(inverse_ * v) * dir;
      rate_b = beta(0);
      for (std::size_t i = 0; i < n; ++i) {
        double r = q(i, c) * dir + y_of(i) * rate_b;
        for (Eigen::Index a = 0; a < l; ++a) r += q(i, margin_[static_cast<std::size_t>(a)]) * beta(a + 1);
        rate_g[i] = r;
      }
      for (auto s : margin_) rate_g[s] = 0.0;
    }

    Breakpoint bp;
    const auto& pc = points_[c];
    if (!bias_only) {
      if (direction > 0) {
        bp.offer(cap_c - pc.alpha, Event::moving_to_error, c, -1);
      } else {
        bp.offer(pc.alpha, Event::moving_done, c, -1);
      }
    }
    if (direction > 0 && rate_g[c] > 0.0) {
      bp.offer(-g_[c] / rate_g[c], Event::moving_to_margin, c, -1);
    }
    for (Eigen::Index a = 0; a < l; ++a) {
      const std::size_t s = margin_[static_cast<std::size_t>(a)];
      const double r = beta(a + 1);
      if (r > 0.0) {
        bp.offer((cap_c - points_[s].alpha) / r, Event::margin_to_error, s, points_[s].id);
      } else if (r < 0.0) {
        bp.offer(-points_[s].alpha / r, Event::margin_to_reserve, s, points_[s].id);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c) continue;
      const auto& p = points_[i];
      if (p.set == PointSet::error && rate_g[i] > 0.0) {
        bp.offer(-g_[i] / rate_g[i], Event::enter_margin, i, p.id);
      } else if (p.set == PointSet::reserve && rate_g[i] < 0.0) {
        bp.offer(-g_[i] / rate_g[i], Event::enter_margin, i, p.id);
      }
    }

    if (bp.event == Event::none || !std::isfinite(bp.step)) {
      throw Error(ErrorKind::solver, "no admissible breakpoint while updating point " +
                                         std::to_string(points_[c].id));
    }

    // Advance along the path.
    const double step = bp.step;
    points_[c].alpha += rate_alpha_c * step;
    bias_ += rate_b * step;
    for (Eigen::Index a = 0; a < l; ++a) points_[margin_[static_cast<std::size_t>(a)]].alpha += beta(a + 1) * step;
    for (std::size_t i = 0; i < n; ++i) g_[i] += rate_g[i] * step;

    auto margin_pos = [this](std::size_t slot) {
      return static_cast<std::size_t>(std::find(margin_.begin(), margin_.end(), slot) - margin_.begin());
    };

    switch (bp.event) {
      case Event::moving_to_margin:
        g_[c] = 0.0;
        if (points_[c].alpha <= 0.0) {
          points_[c].alpha = 0.0;
          points_[c].set = PointSet::reserve;
        } else {
          margin_insert(c);
        }
        return;
      case Event::moving_to_error:
        points_[c].alpha = cap_c;
        points_[c].set = PointSet::error;
        return;
      case Event::moving_done:
        points_[c].alpha = 0.0;
        return;
      case Event::margin_to_error:
        points_[bp.slot].alpha = cap_c;
        points_[bp.slot].set = PointSet::error;
        margin_erase(margin_pos(bp.slot));
        break;
      case Event::margin_to_reserve:
        points_[bp.slot].alpha = 0.0;
        points_[bp.slot].set = PointSet::reserve;
        margin_erase(margin_pos(bp.slot));
        break;
      case Event::enter_margin:
        g_[bp.slot] = 0.0;
        margin_insert(bp.slot);
        break;
      case Event::none:
        break;
    }
  }
}

// Re-solves the margin system for the current partition so coefficient and
// bias drift accumulated along the path does not survive the call.
void SvmModel::polish() {
  const auto l = static_cast<Eigen::Index>(margin_.size());
  if (l > 0) {
    Eigen::VectorXd rhs(l + 1);
    double balance = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].set != PointSet::margin) balance += points_[i].alpha * y_of(i);
    }
    rhs(0) = -balance;
    for (Eigen::Index a = 0; a < l; ++a) {
      const std::size_t s = margin_[static_cast<std::size_t>(a)];
      double acc = 1.0;
      for (std::size_t j = 0; j < points_.size(); ++j) {
        if (points_[j].set != PointSet::margin && points_[j].alpha != 0.0) acc -= q(s, j) * points_[j].alpha;
      }
      rhs(a + 1) = acc;
    }

    auto solve = [&](Eigen::VectorXd& sol) {
      sol = inverse_ * rhs;
      Eigen::MatrixXd m(l + 1, l + 1);
      m(0, 0) = 0.0;
      for (Eigen::Index a = 0; a < l; ++a) {
        const std::size_t sa = margin_[static_cast<std::size_t>(a)];
        m(0, a + 1) = m(a + 1, 0) = y_of(sa);
        for (Eigen::Index b = 0; b < l; ++b) m(a + 1, b + 1) = q(sa, margin_[static_cast<std::size_t>(b)]);
      }
      Eigen::VectorXd resid = rhs - m * sol;
      sol += inverse_ * resid;
      resid = rhs - m * sol;
      return resid.lpNorm<Eigen::Infinity>();
    };

    Eigen::VectorXd sol;
    if (solve(sol) > kResidualLimit) {
      rebuild_inverse();
      if (solve(sol) > kResidualLimit)
        throw Error(ErrorKind::solver, "margin-set system is ill-conditioned");
    }
    bias_ = sol(0);
    for (Eigen::Index a = 0; a < l; ++a) {
      auto& p = points_[margin_[static_cast<std::size_t>(a)]];
      p.alpha = std::clamp(sol(a + 1), 0.0, params_.c);
    }
  }
  recompute_residuals();
}

// Margin points whose coefficient sits on a bound (within rounding) are
// moved to the matching bound set.
void SvmModel::settle() {
  const double tiny = 1e-12 * params_.c;
  for (std::size_t pos = margin_.size(); pos-- > 0;) {
    auto& p = points_[margin_[pos]];
    if (p.alpha <= tiny) {
      p.alpha = 0.0;
      p.set = PointSet::reserve;
      margin_erase(pos);
    } else if (p.alpha >= params_.c - tiny) {
      p.alpha = params_.c;
      p.set = PointSet::error;
      margin_erase(pos);
    }
  }
}

void SvmModel::evict_one() {
  std::optional<std::size_t> victim;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].set == PointSet::reserve && (!victim || points_[i].id < points_[*victim].id)) victim = i;
  }
  if (victim) {
    last_evicted_ = points_[*victim].id;
    remove_slot(*victim);
    return;
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!victim) {
      victim = i;
      continue;
    }
    const auto& a = points_[i];
    const auto& b = points_[*victim];
    if (a.alpha < b.alpha || (a.alpha == b.alpha && a.id < b.id)) victim = i;
  }
  const auto id = points_[*victim].id;
  unlearn_one(id);
  last_evicted_ = id;
}

std::int64_t SvmModel::learn_one(const Point& x, Label y) {
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorKind::input, "non-finite feature value");

  // Eviction is part of the call: a failure afterwards must undo it too.
  const SvmModel before_eviction = points_.size() >= params_.budget ? *this : SvmModel(params_);
  const bool evicting = points_.size() >= params_.budget;
  last_evicted_.reset();
  try {
    if (evicting) evict_one();
    Snapshot snap = snapshot();
    const std::int64_t id = next_id_;
    const std::size_t c = append_slot(x, y, id);
    try {
      double f = bias_;
      for (std::size_t j = 0; j < c; ++j) {
        if (points_[j].alpha != 0.0)
          f += points_[j].alpha * y_of(j) * gram_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
      }
      g_[c] = y_of(c) * f - 1.0;
      if (g_[c] < 0.0) {
        points_[c].set = PointSet::error;  // placeholder until the path finishes
        run_path(c, +1);
        polish();
        settle();
        recompute_residuals();
      } else {
        points_[c].set = PointSet::reserve;
      }
    } catch (...) {
      restore(std::move(snap));
      throw;
    }
    ++next_id_;
    return id;
  } catch (...) {
    if (evicting) *this = before_eviction;
    throw;
  }
}

void SvmModel::unlearn_one(std::int64_t id) {
  const std::size_t c = slot_of(id);
  Snapshot snap = snapshot();
  try {
    auto& p = points_[c];
    if (p.alpha > 0.0) {
      if (p.set == PointSet::margin) {
        const auto pos = static_cast<std::size_t>(std::find(margin_.begin(), margin_.end(), c) - margin_.begin());
        margin_erase(pos);
      }
      p.set = PointSet::error;  // marks the point as off the margin while it moves
      run_path(c, -1);
      points_[c].alpha = 0.0;
      points_[c].set = PointSet::reserve;
      polish();
      settle();
      recompute_residuals();
    }
  } catch (...) {
    restore(std::move(snap));
    throw;
  }
  remove_slot(c);
}

}  // namespace faultline
