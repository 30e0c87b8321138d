#include <benchmark/benchmark.h>

#include <cstdint>

#include "reluprop/gaussian.hpp"
#include "reluprop/model_io.hpp"
#include "reluprop/monte_carlo.hpp"
#include "reluprop/propagation.hpp"
#include "reluprop/rectified.hpp"

using namespace reluprop;

namespace {

void BM_BvnCdf(benchmark::State& state) {
  // One correlation per Genz branch: 6, 12 and 20 point rules, then |rho| >= 0.925.
  const double rhos[] = {0.2, 0.5, 0.8, 0.97};
  const Correlation rho(rhos[state.range(0)]);
  double x = -1.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bvn_cdf(x, 0.7, rho));
    x = x < 2.0 ? x + 0.01 : -1.3;
  }
}
BENCHMARK(BM_BvnCdf)->DenseRange(0, 3);

void BM_ReluCrossMoment(benchmark::State& state) {
  const PairParams p{{0.3, 1.2}, {-0.5, 0.7}, Correlation(0.6)};
  for (auto _ : state) benchmark::DoNotOptimize(relu_cross_moment(p));
}
BENCHMARK(BM_ReluCrossMoment);

void BM_Rectify(benchmark::State& state) {
  const auto p = static_cast<int>(state.range(0));
  const MlpModel model = gen_model(2, p, 7).folded();
  const GaussianDist input = gen_dist(2, 8).to_dist();
  const GaussianDist w = hidden_preactivation(input, model);
  for (auto _ : state) benchmark::DoNotOptimize(rectify(w));
  state.SetComplexityN(p);
}
BENCHMARK(BM_Rectify)->RangeMultiplier(2)->Range(4, 64)->Complexity(benchmark::oNSquared);

void BM_OutputMoments(benchmark::State& state) {
  const MlpModel model = gen_model(2, 12, 42).folded();
  const GaussianDist input = gen_dist(2, 1).to_dist();
  for (auto _ : state) benchmark::DoNotOptimize(output_moments(input, model));
}
BENCHMARK(BM_OutputMoments);

void BM_MonteCarlo(benchmark::State& state) {
  const MlpModel model = gen_model(2, 12, 42).folded();
  const GaussianDist input = gen_dist(2, 1).to_dist();
  McConfig cfg;
  cfg.n_samples = static_cast<std::uint64_t>(state.range(0));
  cfg.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(mc_output_moments(input, model, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
