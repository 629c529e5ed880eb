#include <benchmark/benchmark.h>

#include "stylesplit/harness.hpp"
#include "stylesplit/metrics.hpp"
#include "stylesplit/morphological_learner.hpp"

using namespace stylesplit;

namespace {

const Scan& phantom_scan() {
  static const auto scans = generate_phantom(1, 2);
  return scans.front();
}

PreparedExperiment& prepared() {
  static auto prep = prepare_experiment(ExperimentConfig{});
  return *prep;
}

}  // namespace

static void BM_Dilate(benchmark::State& state) {
  const Mask& m = phantom_scan().slices()[10].mask;
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dilate(m, r));
}
BENCHMARK(BM_Dilate)->Arg(1)->Arg(5)->Arg(15);

static void BM_SdscSlice(benchmark::State& state) {
  const Mask& g = phantom_scan().slices()[10].mask;
  const Mask p = dilate(g, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sdsc_slice(g, p, {}));
}
BENCHMARK(BM_SdscSlice);

static void BM_BoundaryDistanceField(benchmark::State& state) {
  const Mask& g = phantom_scan().slices()[10].mask;
  const auto b = boundary(g);
  for (auto _ : state) benchmark::DoNotOptimize(boundary_distance_field(b, g.width(), g.height()));
}
BENCHMARK(BM_BoundaryDistanceField);

// A fresh learner per iteration so the per-scan memo starts cold.
static void BM_FitTenScans(benchmark::State& state) {
  auto& prep = prepared();
  const std::vector<const Scan*> ten(prep.scans.begin(), prep.scans.begin() + 10);
  for (auto _ : state) {
    auto learner = LearnerRegistry::instance().make(prep.learner->spec());
    benchmark::DoNotOptimize(learner->fit(ten));
  }
}
BENCHMARK(BM_FitTenScans)->Unit(benchmark::kMillisecond);

static void BM_ProxyG(benchmark::State& state) {
  auto& prep = prepared();
  const auto base = compute_baseline(prep.scans, *prep.learner);
  Rng rng(2);
  for (auto _ : state) {
    state.PauseTiming();
    PartitionEvaluator ev(prep.scans, *prep.learner, base);
    std::vector<std::uint8_t> bits(prep.scans.size(), 0);
    for (std::size_t i = 1; i < bits.size(); ++i) bits[i] = rng() & 1;
    bits[1] = 1;
    state.ResumeTiming();
    benchmark::DoNotOptimize(ev.proxy_g(Partition(bits)));
  }
}
BENCHMARK(BM_ProxyG)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
