#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "faultline/svm.hpp"

namespace faultline {

struct ParamGrid {
  std::vector<double> c_values{0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma_values{0.01, 0.1, 1.0, 10.0};
  std::size_t k_folds = 5;

  /// Lists must be non-empty, positive and strictly ascending; k >= 2.
  void validate() const;
};

struct TuneResult {
  double c = 0.0;
  double gamma = 0.0;
  double cv_accuracy = 0.0;
};

/// Strided k-fold CV: fold i holds points i, i + k, i + 2k, ... in arrival
/// order. Throws Error{insufficient_data} unless each class has >= k points.
/// A training split that lacks one class predicts that split's only class.
double cross_validate(std::span<const LabeledPoint> buffer, KernelKind kind, double c, double gamma,
                      std::size_t k);

/// Exhaustive search. Highest accuracy wins; ties go to the smallest C, then
/// the smallest gamma.
TuneResult grid_search(std::span<const LabeledPoint> buffer, const ParamGrid& grid, KernelKind kind);

}  // namespace faultline
