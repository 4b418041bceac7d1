#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "faultline/error.hpp"
#include "faultline/svm.hpp"

namespace faultline {

namespace {

constexpr const char* kMagic = "faultline-svm";
constexpr int kVersion = 1;

template <typename T>
T read_field(std::istream& in, const std::string& key) {
  std::string k;
  T v{};
  if (!(in >> k) || k != key || !(in >> v))
    throw Error(ErrorKind::parse, "checkpoint: expected field '" + key + "'");
  return v;
}

}  // namespace

void save_checkpoint(const SvmModel& model, std::ostream& out) {
  const auto& p = model.params();
  out << kMagic << ' ' << kVersion << '\n';
  out << std::setprecision(17);
  out << "kernel " << to_string(p.kernel.kind) << ' ' << p.kernel.gamma << '\n';
  out << "c " << p.c << '\n';
  out << "epsilon " << p.epsilon << '\n';
  out << "budget " << p.budget << '\n';
  out << "bias " << model.bias() << '\n';
  out << "points " << model.size() << '\n';
  for (const auto& tp : model.points()) {
    out << tp.id << ' ' << static_cast<int>(tp.y) << ' ' << tp.alpha;
    for (double v : tp.x) out << ' ' << v;
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "checkpoint: write failed");
}

SvmModel load_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic)
    throw Error(ErrorKind::parse, "checkpoint: bad header");
  if (version != kVersion)
    throw Error(ErrorKind::parse, "checkpoint: unsupported version " + std::to_string(version));

  SvmParams params;
  std::string k;
  std::string kind;
  if (!(in >> k >> kind >> params.kernel.gamma) || k != "kernel")
    throw Error(ErrorKind::parse, "checkpoint: expected field 'kernel'");
  const auto kk = parse_kernel_kind(kind);
  if (!kk) throw Error(ErrorKind::parse, "checkpoint: unknown kernel '" + kind + "'");
  params.kernel.kind = *kk;
  params.c = read_field<double>(in, "c");
  params.epsilon = read_field<double>(in, "epsilon");
  params.budget = read_field<std::size_t>(in, "budget");
  const double bias = read_field<double>(in, "bias");
  const auto count = read_field<std::size_t>(in, "points");

  std::vector<TrainedPoint> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    TrainedPoint tp;
    int y = 0;
    if (!(in >> tp.id >> y >> tp.alpha)) throw Error(ErrorKind::parse, "checkpoint: truncated point list");
    if (y != 1 && y != -1) throw Error(ErrorKind::parse, "checkpoint: label must be -1 or 1");
    tp.y = static_cast<Label>(y);
    for (auto& v : tp.x)
      if (!(in >> v)) throw Error(ErrorKind::parse, "checkpoint: truncated point list");
    points.push_back(tp);
  }
  try {
    return SvmModel::from_solution(params, bias, std::move(points));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw Error(ErrorKind::parse, std::string("checkpoint: ") + e.what());
    throw;
  }
}

}  // namespace faultline
