#include <benchmark/benchmark.h>

#include "bgvcf/config.hpp"
#include "bgvcf/grassmann.hpp"
#include "bgvcf/sim.hpp"
#include "bgvcf/stap.hpp"
#include "bgvcf/thpd.hpp"

using namespace bgvcf;

namespace {

const sim::SpaceTimeDataset& reference() {
  static const auto d = [] {
    sim::ScenarioConfig s;
    s.rng_seed = 1;
    return sim::simulate(s, PipelineConfig::default_targets(s.noise_variance, 10.0));
  }();
  return d;
}

void BM_Burg(benchmark::State& state) {
  const auto& x = reference().at(0).data;
  for (auto _ : state) {
    benchmark::DoNotOptimize(thpd::burg_reflection({x.data(), static_cast<std::size_t>(x.size())}, 0.01, -1));
  }
}
BENCHMARK(BM_Burg);

void BM_ThpdCovariance(benchmark::State& state) {
  const auto& snap = reference().at(0);
  for (auto _ : state) benchmark::DoNotOptimize(thpd::thpd_covariance(snap, {}).dense());
}
BENCHMARK(BM_ThpdCovariance);

void BM_ExtractSubspace(benchmark::State& state) {
  const auto cov = thpd::thpd_covariance(reference().at(0), {});
  for (auto _ : state) benchmark::DoNotOptimize(grassmann::extract_subspace(cov, 21));
}
BENCHMARK(BM_ExtractSubspace);

void BM_EstimateCcm(benchmark::State& state) {
  std::vector<grassmann::GrassmannPoint> points;
  for (int cell = 0; cell < state.range(0); ++cell) {
    points.push_back(grassmann::extract_subspace(thpd::thpd_covariance(reference().at(cell), {}), 21));
  }
  for (auto _ : state) benchmark::DoNotOptimize(grassmann::estimate_ccm(points, {}));
}
BENCHMARK(BM_EstimateCcm)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_StapWeights(benchmark::State& state) {
  const CMatrix r = reference().cell_covariance(36);
  const CVector v = sim::steering_vector(0.25, 0.0, 12, 10);
  for (auto _ : state) benchmark::DoNotOptimize(stap::stap_weights(r, v));
}
BENCHMARK(BM_StapWeights);

}  // namespace

BENCHMARK_MAIN();
