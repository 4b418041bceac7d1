#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "faultline/engine.hpp"
#include "faultline/sim.hpp"
#include "faultline/svm.hpp"

using namespace faultline;

namespace {

std::vector<LabeledPoint> blobs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<LabeledPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].y = i % 2 ? Label::normal : Label::fault;
    for (auto& v : out[i].x) v = 0.75 * label_sign(out[i].y) + noise(rng);
  }
  return out;
}

// Training from empty up to n points, one learn_one at a time.
void BM_IncrementalTrain(benchmark::State& state) {
  const auto data = blobs(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    SvmModel m(SvmParams{KernelSpec{KernelKind::rbf, 0.5}, 10.0, 1e-6, data.size()});
    for (const auto& p : data) m.learn_one(p.x, p.y);
    benchmark::DoNotOptimize(m.bias());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_IncrementalTrain)->RangeMultiplier(2)->Range(50, 400)->Complexity();

// One learn_one at a full budget, so each call also evicts.
void BM_LearnAtBudget(benchmark::State& state) {
  const auto budget = static_cast<std::size_t>(state.range(0));
  const auto data = blobs(budget + 4096, 2);
  SvmModel m(SvmParams{KernelSpec{KernelKind::rbf, 0.5}, 10.0, 1e-6, budget});
  std::size_t i = 0;
  for (; i < budget; ++i) m.learn_one(data[i].x, data[i].y);
  for (auto _ : state) {
    if (i == data.size()) i = budget;
    m.learn_one(data[i].x, data[i].y);
    ++i;
  }
}
BENCHMARK(BM_LearnAtBudget)->Arg(48)->Arg(200)->Arg(400);

void BM_BatchTrain(benchmark::State& state) {
  const auto data = blobs(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(batch_train(data, KernelSpec{KernelKind::rbf, 0.5}, 10.0).bias());
}
BENCHMARK(BM_BatchTrain)->RangeMultiplier(2)->Range(50, 400);

// Whole pipeline throughput on the default rig, in samples per second.
void BM_EngineIngest(benchmark::State& state) {
  SimConfig sim;
  sim.total_samples = 1 << 18;
  const auto stream = generate(sim);
  for (auto _ : state) {
    Engine e{EngineConfig{}};
    std::size_t events = 0;
    for (const auto& s : stream.samples) events += e.ingest(s).size();
    benchmark::DoNotOptimize(events);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.samples.size()));
}
BENCHMARK(BM_EngineIngest)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
