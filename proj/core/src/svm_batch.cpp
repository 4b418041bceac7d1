#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "faultline/error.hpp"
#include "faultline/svm.hpp"

namespace faultline {

namespace {

constexpr double kTau = 1e-12;

}  // namespace

// SMO over the full kernel matrix with the second-order working-set rule of
// Fan, Chen and Lin. Gradient G = Q alpha - 1.
SvmModel batch_train(std::span<const LabeledPoint> data, const KernelSpec& kernel, double c, double tol) {
  kernel.validate();
  const std::size_t n = data.size();
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& p : data) {
    for (double v : p.x)
      if (!std::isfinite(v)) throw Error(ErrorKind::input, "non-finite feature value");
    (p.y == Label::fault ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw Error(ErrorKind::training, "batch training needs both classes");

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = label_sign(data[i].y);
  Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = y[i] * y[j] * kernel_eval(kernel, data[i].x, data[j].x);
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  auto qa = [&q](std::size_t i, std::size_t j) {
    return q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto is_upper = [&](std::size_t i) { return alpha[i] >= c; };
  auto is_lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

  const std::size_t max_iter = std::max<std::size_t>(10'000'000, 100 * n);
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t sel_i = -1;
    std::ptrdiff_t sel_j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!is_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          sel_i = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!is_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        sel_i = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (sel_i < 0) break;
    const auto i = static_cast<std::size_t>(sel_i);

    double obj_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (is_lower(t)) continue;
        const double diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (diff > 0.0) {
          double quad = qa(i, i) + qa(t, t) - 2.0 * y[i] * qa(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= obj_min) {
            obj_min = obj;
            sel_j = static_cast<std::ptrdiff_t>(t);
          }
        }
      } else {
        if (is_upper(t)) continue;
        const double diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (diff > 0.0) {
          double quad = qa(i, i) + qa(t, t) + 2.0 * y[i] * qa(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= obj_min) {
            obj_min = obj;
            sel_j = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }
    if (gmax + gmax2 < tol || sel_j < 0) break;
    const auto j = static_cast<std::size_t>(sel_j);

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = qa(i, i) + qa(j, j) + 2.0 * qa(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = qa(i, i) + qa(j, j) - 2.0 * qa(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += qa(t, i) * di + qa(t, j) * dj;
  }
  if (iter >= max_iter) throw Error(ErrorKind::solver, "batch solver hit its iteration cap");

  // Bias from free coefficients: g_i = grad_i + y_i b = 0 on the margin.
  double sum_free = 0.0;
  std::size_t n_free = 0;
  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double candidate = -y[t] * grad[t];
    if (alpha[t] > 0.0 && alpha[t] < c) {
      sum_free += candidate;
      ++n_free;
    } else {
      // reserve needs y b >= -grad, error needs y b <= -grad
      const bool lower_bound = (alpha[t] <= 0.0) == (y[t] > 0);
      if (lower_bound) {
        lb = std::max(lb, candidate);
      } else {
        ub = std::min(ub, candidate);
      }
    }
  }
  double bias = 0.0;
  if (n_free > 0) {
    bias = sum_free / static_cast<double>(n_free);
  } else if (std::isfinite(lb) && std::isfinite(ub)) {
    bias = 0.5 * (lb + ub);
  } else if (std::isfinite(lb)) {
    bias = lb;
  } else if (std::isfinite(ub)) {
    bias = ub;
  }

  SvmParams params;
  params.kernel = kernel;
  params.c = c;
  params.budget = std::max<std::size_t>(n, 1);
  std::vector<TrainedPoint> points(n);
  for (std::size_t t = 0; t < n; ++t) {
    points[t] = {static_cast<std::int64_t>(t), data[t].x, data[t].y, alpha[t], PointSet::reserve};
  }
  return SvmModel::from_solution(params, bias, std::move(points));
}

}  // namespace faultline
