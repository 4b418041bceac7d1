#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "faultline/signal.hpp"

namespace faultline {

/// Per-dimension z-normalization, frozen from a calibration set.
struct Normalizer {
  Point mean{};
  Point scale{1.0, 1.0, 1.0, 1.0};

  /// Dimensions with (near) zero spread keep scale 1.
  static Normalizer fit(std::span<const Point> data);
  Point apply(const Point& p) const;
};

struct SomConfig {
  std::size_t grid = 8;
  double alpha0 = 0.5;
  double alpha_final = 0.01;
  double sigma0 = 0.0;  // 0 selects grid / 2
  double sigma_final = 0.5;
  std::size_t steps = 0;  // 0 selects 10 * |data| at fit time
  std::uint64_t seed = 1;

  /// Throws Error{config} when the schedule bounds are violated.
  void validate() const;
  double initial_sigma() const { return sigma0 > 0.0 ? sigma0 : static_cast<double>(grid) / 2.0; }
};

struct UnitIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const UnitIndex&, const UnitIndex&) = default;
};

/// Square Kohonen map. Codebook is stored row-major.
class SomModel {
 public:
  explicit SomModel(SomConfig cfg);

  const SomConfig& config() const { return cfg_; }
  std::size_t grid() const { return cfg_.grid; }
  std::size_t units() const { return codebook_.size(); }
  std::size_t total_steps() const { return total_steps_; }

  const Point& unit(std::size_t row, std::size_t col) const { return codebook_[row * cfg_.grid + col]; }
  Point& unit(std::size_t row, std::size_t col) { return codebook_[row * cfg_.grid + col]; }
  std::span<const Point> codebook() const { return codebook_; }
  std::span<Point> codebook() { return codebook_; }

  /// Nearest unit by squared Euclidean distance; ties go to the smallest
  /// row-major index.
  UnitIndex bmu(const Point& x) const;

  double quantization_error(const Point& x) const;

  double learning_rate(std::size_t step) const;
  double radius(std::size_t step) const;

  /// One Kohonen update at schedule position `step` (must be < total_steps).
  void train_step(const Point& x, std::size_t step);

  /// Seeds every unit with a data point drawn with replacement (seeded RNG).
  /// Throws Error{calibration} on empty data.
  void initialize(std::span<const Point> data);

  /// initialize, then total_steps updates cycling through data in order.
  void fit(std::span<const Point> data);

  /// Sets the schedule length without fitting (used by callers stepping the
  /// map by hand).
  void set_total_steps(std::size_t steps) { total_steps_ = steps; }

 private:
  SomConfig cfg_;
  std::vector<Point> codebook_;
  std::size_t total_steps_ = 1;
};

double mean_quantization_error(const SomModel& som, std::span<const Point> data);

/// QE statistics of the calibration set and the outlier multiplier used for
/// pseudo-labels.
struct CalibStats {
  double mu_qe = 0.0;
  double sd_qe = 0.0;
  double k_label = 3.0;

  double threshold() const { return mu_qe + k_label * sd_qe; }

  static CalibStats compute(const SomModel& som, std::span<const Point> data, double k_label);
};

/// fault when qe exceeds mu + k * sd, normal otherwise.
Label pseudo_label(const CalibStats& stats, double qe);

}  // namespace faultline
