#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "faultline/signal.hpp"

namespace faultline {

enum class KernelKind { linear, rbf };

std::optional<KernelKind> parse_kernel_kind(std::string_view s);
std::string_view to_string(KernelKind k);

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double gamma = 0.5;

  void validate() const;
};

/// linear: <x, z>; rbf: exp(-gamma * |x - z|^2).
double kernel_eval(const KernelSpec& spec, const Point& x, const Point& z);

/// KKT partition of the soft-margin dual.
///   margin:  0 < alpha < C, g = 0
///   error:   alpha = C,     g <= 0
///   reserve: alpha = 0,     g >= 0
/// with g = y f(x) - 1.
enum class PointSet { margin, error, reserve };

std::string_view to_string(PointSet s);

struct TrainedPoint {
  std::int64_t id = 0;
  Point x{};
  Label y = Label::normal;
  double alpha = 0.0;
  PointSet set = PointSet::reserve;
};

struct KktViolation {
  std::int64_t id = 0;
  double g = 0.0;
  PointSet expected_set = PointSet::reserve;
};

struct SvmParams {
  KernelSpec kernel;
  double c = 10.0;
  double epsilon = 1e-6;
  std::size_t budget = 400;

  void validate() const;
};

/// Binary soft-margin SVM trained one point at a time. Every learn_one and
/// unlearn_one moves the dual along the path that keeps all stored points in
/// their KKT case, so the model is the exact dual optimum over its points
/// after each call.
///
/// Single writer; const members are safe to call concurrently.
class SvmModel {
 public:
  explicit SvmModel(SvmParams params);

  /// Builds a model from a finished dual solution (batch solver output or a
  /// checkpoint). Sets are inferred from alpha; ids must be unique.
  static SvmModel from_solution(SvmParams params, double bias, std::vector<TrainedPoint> points);

  /// Adds a point and restores KKT. Returns the id assigned to it. When the
  /// budget is full the eviction rule runs first. Throws Error{input} for
  /// non-finite features and Error{solver} if the update cannot complete (the
  /// model is then left exactly as before the call, eviction included).
  std::int64_t learn_one(const Point& x, Label y);

  /// Drives the point's coefficient to zero and removes it. Throws
  /// Error{not_found} for unknown ids.
  void unlearn_one(std::int64_t id);

  double decision(const Point& x) const;

  /// Recomputes every residual from scratch and lists the points whose set
  /// condition fails beyond eps.
  std::vector<KktViolation> kkt_report(double eps) const;

  const SvmParams& params() const { return params_; }
  double bias() const { return bias_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::span<const TrainedPoint> points() const { return points_; }
  const TrainedPoint* find(std::int64_t id) const;
  bool has_class(Label y) const;
  bool has_both_classes() const { return has_class(Label::normal) && has_class(Label::fault); }
  std::size_t margin_size() const { return margin_.size(); }

  /// sum_i alpha_i y_i; zero at every optimum.
  double dual_balance() const;

  /// Id that the next learn_one will assign.
  std::int64_t next_id() const { return next_id_; }
  /// Id evicted by the most recent learn_one, if any.
  std::optional<std::int64_t> last_evicted() const { return last_evicted_; }

 private:
  struct Snapshot {
    std::vector<TrainedPoint> points;
    std::vector<double> g;
    std::vector<std::size_t> margin;
    Eigen::MatrixXd inverse;
    double bias;
  };

  double y_of(std::size_t slot) const { return label_sign(points_[slot].y); }
  double q(std::size_t i, std::size_t j) const { return y_of(i) * y_of(j) * gram_(i, j); }

  std::size_t slot_of(std::int64_t id) const;
  std::size_t append_slot(const Point& x, Label y, std::int64_t id);
  void remove_slot(std::size_t slot);
  void ensure_capacity(std::size_t n);

  void evict_one();
  void run_path(std::size_t c, int direction);
  void margin_insert(std::size_t slot);
  void margin_erase(std::size_t pos);
  void rebuild_inverse();
  void polish();
  void settle();
  void recompute_residuals();

  Snapshot snapshot() const;
  void restore(Snapshot&& s);

  SvmParams params_;
  std::vector<TrainedPoint> points_;
  std::vector<double> g_;             // residual y f(x) - 1 per slot
  std::vector<std::size_t> margin_;   // slots in the margin set, in inverse order
  Eigen::MatrixXd inverse_;           // inverse of [[0, y_S^T], [y_S, Q_SS]]
  Eigen::MatrixXd gram_;              // kernel cache by slot
  double bias_ = 0.0;
  std::int64_t next_id_ = 0;
  std::optional<std::int64_t> last_evicted_;
};

/// Reference batch solver: SMO with second-order working-set selection,
/// iterated until the maximal violating pair gap is below tol. Throws
/// Error{training} unless both classes are present.
struct LabeledPoint {
  Point x{};
  Label y = Label::normal;
};

SvmModel batch_train(std::span<const LabeledPoint> data, const KernelSpec& kernel, double c,
                     double tol = 1e-8);

/// Text checkpoint ("faultline-svm 1"). Values are written with 17
/// significant digits, so a reload reproduces the model bit for bit.
void save_checkpoint(const SvmModel& model, std::ostream& out);
SvmModel load_checkpoint(std::istream& in);

}  // namespace faultline
