#include "faultline/tune.hpp"

#include <algorithm>
#include <string>

#include "faultline/error.hpp"

namespace faultline {

namespace {

void check_ascending(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw Error(ErrorKind::config, std::string(name) + " must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw Error(ErrorKind::config, std::string(name) + " values must be > 0");
    if (i > 0 && !(v[i] > v[i - 1]))
      throw Error(ErrorKind::config, std::string(name) + " must be strictly ascending");
  }
}

}  // namespace

void ParamGrid::validate() const {
  check_ascending(c_values, "tune.c_values");
  check_ascending(gamma_values, "tune.gamma_values");
  if (k_folds < 2) throw Error(ErrorKind::config, "tune.folds must be >= 2");
}

double cross_validate(std::span<const LabeledPoint> buffer, KernelKind kind, double c, double gamma,
                      std::size_t k) {
  if (k < 2) throw Error(ErrorKind::config, "cross validation needs k >= 2");
  const auto pos = static_cast<std::size_t>(
      std::count_if(buffer.begin(), buffer.end(), [](const LabeledPoint& p) { return p.y == Label::fault; }));
  const std::size_t neg = buffer.size() - pos;
  if (pos < k || neg < k) {
    throw Error(ErrorKind::insufficient_data,
                "cross validation needs >= " + std::to_string(k) + " points of each class (have " +
                    std::to_string(neg) + " normal, " + std::to_string(pos) + " fault)");
  }
  const KernelSpec spec{kind, gamma};

  double total = 0.0;
  std::vector<LabeledPoint> train;
  train.reserve(buffer.size());
  for (std::size_t fold = 0; fold < k; ++fold) {
    train.clear();
    for (std::size_t i = 0; i < buffer.size(); ++i)
      if (i % k != fold) train.push_back(buffer[i]);

    const bool train_pos = std::any_of(train.begin(), train.end(), [](auto& p) { return p.y == Label::fault; });
    const bool train_neg = std::any_of(train.begin(), train.end(), [](auto& p) { return p.y == Label::normal; });

    std::size_t correct = 0;
    std::size_t held = 0;
    if (train_pos && train_neg) {
      const SvmModel model = batch_train(train, spec, c);
      for (std::size_t i = fold; i < buffer.size(); i += k) {
        ++held;
        if (label_from_sign(model.decision(buffer[i].x)) == buffer[i].y) ++correct;
      }
    } else {
      const Label only = train_pos ? Label::fault : Label::normal;
      for (std::size_t i = fold; i < buffer.size(); i += k) {
        ++held;
        if (buffer[i].y == only) ++correct;
      }
    }
    total += held > 0 ? static_cast<double>(correct) / static_cast<double>(held) : 0.0;
  }
  return total / static_cast<double>(k);
}

TuneResult grid_search(std::span<const LabeledPoint> buffer, const ParamGrid& grid, KernelKind kind) {
  grid.validate();
  std::vector<double> cs = grid.c_values;
  std::vector<double> gs = grid.gamma_values;
  std::sort(cs.begin(), cs.end());
  std::sort(gs.begin(), gs.end());
  if (kind == KernelKind::linear) gs.resize(1);  // gamma is unused

  TuneResult best;
  bool have = false;
  for (double c : cs) {
    for (double g : gs) {
      const double acc = cross_validate(buffer, kind, c, g, grid.k_folds);
      // Ascending enumeration: a strict improvement is needed to displace
      // an earlier (smaller C, then smaller gamma) candidate.
      if (!have || acc > best.cv_accuracy) {
        best = {c, g, acc};
        have = true;
      }
    }
  }
  return best;
}

}  // namespace faultline
