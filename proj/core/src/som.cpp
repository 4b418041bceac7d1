#include "faultline/som.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "faultline/error.hpp"

namespace faultline {

namespace {

double squared_distance(const Point& a, const Point& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    const double e = a[i] - b[i];
    d += e * e;
  }
  return d;
}

}  // namespace

Normalizer Normalizer::fit(std::span<const Point> data) {
  Normalizer n;
  if (data.empty()) return n;
  const double count = static_cast<double>(data.size());
  for (const auto& p : data)
    for (std::size_t i = 0; i < kFeatureDim; ++i) n.mean[i] += p[i];
  for (auto& m : n.mean) m /= count;
  Point var{};
  for (const auto& p : data)
    for (std::size_t i = 0; i < kFeatureDim; ++i) var[i] += (p[i] - n.mean[i]) * (p[i] - n.mean[i]);
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    const double sd = std::sqrt(var[i] / count);
    n.scale[i] = sd > 1e-12 ? sd : 1.0;
  }
  return n;
}

Point Normalizer::apply(const Point& p) const {
  Point out;
  for (std::size_t i = 0; i < kFeatureDim; ++i) out[i] = (p[i] - mean[i]) / scale[i];
  return out;
}

void SomConfig::validate() const {
  if (grid < 1) throw Error(ErrorKind::config, "som.grid must be >= 1");
  if (!(alpha_final > 0.0 && alpha_final <= alpha0 && alpha0 < 1.0))
    throw Error(ErrorKind::config, "som learning rates must satisfy 0 < alpha_final <= alpha0 < 1");
  const double s0 = initial_sigma();
  if (!(sigma_final > 0.0 && sigma_final <= s0))
    throw Error(ErrorKind::config, "som radii must satisfy 0 < sigma_final <= sigma0");
}

SomModel::SomModel(SomConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  codebook_.assign(cfg_.grid * cfg_.grid, Point{});
}

UnitIndex SomModel::bmu(const Point& x) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < codebook_.size(); ++u) {
    const double d = squared_distance(codebook_[u], x);
    if (d < best_d) {
      best_d = d;
      best = u;
    }
  }
  return {best / cfg_.grid, best % cfg_.grid};
}

double SomModel::quantization_error(const Point& x) const {
  const auto b = bmu(x);
  return std::sqrt(squared_distance(unit(b.row, b.col), x));
}

double SomModel::learning_rate(std::size_t step) const {
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps_);
  return cfg_.alpha0 * std::pow(cfg_.alpha_final / cfg_.alpha0, frac);
}

double SomModel::radius(std::size_t step) const {
  const double s0 = cfg_.initial_sigma();
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps_);
  return s0 * std::pow(cfg_.sigma_final / s0, frac);
}

void SomModel::train_step(const Point& x, std::size_t step) {
  const auto b = bmu(x);
  const double alpha = learning_rate(step);
  const double sigma = radius(step);
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t r = 0; r < cfg_.grid; ++r) {
    for (std::size_t c = 0; c < cfg_.grid; ++c) {
      const double dr = static_cast<double>(r) - static_cast<double>(b.row);
      const double dc = static_cast<double>(c) - static_cast<double>(b.col);
      const double h = std::exp(-(dr * dr + dc * dc) / denom);
      auto& w = unit(r, c);
      for (std::size_t i = 0; i < kFeatureDim; ++i) w[i] += alpha * h * (x[i] - w[i]);
    }
  }
}

void SomModel::initialize(std::span<const Point> data) {
  if (data.empty()) throw Error(ErrorKind::calibration, "som fit needs at least one vector");
  std::mt19937_64 rng(cfg_.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  for (auto& w : codebook_) w = data[pick(rng)];
}

void SomModel::fit(std::span<const Point> data) {
  initialize(data);
  total_steps_ = cfg_.steps > 0 ? cfg_.steps : 10 * data.size();
  for (std::size_t s = 0; s < total_steps_; ++s) train_step(data[s % data.size()], s);
}

double mean_quantization_error(const SomModel& som, std::span<const Point> data) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : data) sum += som.quantization_error(p);
  return sum / static_cast<double>(data.size());
}

CalibStats CalibStats::compute(const SomModel& som, std::span<const Point> data, double k_label) {
  if (data.empty()) throw Error(ErrorKind::calibration, "calibration set is empty");
  if (!(k_label > 0.0)) throw Error(ErrorKind::config, "som.k_label must be > 0");
  CalibStats st;
  st.k_label = k_label;
  std::vector<double> qe;
  qe.reserve(data.size());
  for (const auto& p : data) qe.push_back(som.quantization_error(p));
  double sum = 0.0;
  for (double v : qe) sum += v;
  st.mu_qe = sum / static_cast<double>(qe.size());
  double var = 0.0;
  for (double v : qe) var += (v - st.mu_qe) * (v - st.mu_qe);
  st.sd_qe = std::sqrt(var / static_cast<double>(qe.size()));
  return st;
}

Label pseudo_label(const CalibStats& stats, double qe) {
  return qe > stats.threshold() ? Label::fault : Label::normal;
}

}  // namespace faultline
