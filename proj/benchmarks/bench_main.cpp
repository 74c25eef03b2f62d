#include <benchmark/benchmark.h>

#include "mvclt/corpus.hpp"
#include "mvclt/verify.hpp"

using namespace mvclt;

namespace {

StatisticVector pair_statistic(std::size_t n) {
  RandomStream rng(3, n);
  return stack({multilinear_statistic(random_multilinear(n, 3, rng), n, "U"),
                multilinear_statistic(random_multilinear(n, 3, rng), n, "V")});
}

void BM_JointTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = ProductModel::iid(rademacher(), n);
  const auto f = pair_statistic(n);
  for (auto _ : state) benchmark::DoNotOptimize(build_joint_table(model, f));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_JointTable)->DenseRange(6, 14, 4);

void BM_ZAlpha(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = ProductModel::iid(rademacher(), n);
  const JointTable t = build_joint_table(model, pair_statistic(n));
  for (auto _ : state) benchmark::DoNotOptimize(z_alpha_moments(t, 0.5));
}
BENCHMARK(BM_ZAlpha)->DenseRange(4, 10, 3);

void BM_McEstimates(benchmark::State& state) {
  const std::size_t n = 6;
  const auto model = ProductModel::iid(bernoulli(0.4), n);
  const auto f = pair_statistic(n);
  McConfig cfg;
  cfg.outer_samples = static_cast<std::uint64_t>(state.range(0));
  cfg.inner_resamples = 16;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mc_estimates(model, f, 0.5, cfg));
}
BENCHMARK(BM_McEstimates)->Arg(1000)->Arg(4000);

void BM_Jacobi(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  RandomStream rng(9, d);
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigen(a));
}
BENCHMARK(BM_Jacobi)->Arg(4)->Arg(16)->Arg(64);

void BM_QfBound(benchmark::State& state) {
  const auto spec = tridiagonal_family(static_cast<std::size_t>(state.range(0)));
  const GaussianTarget target(Matrix{{1.0}});
  for (auto _ : state) benchmark::DoNotOptimize(qf_bound(spec, target, SmoothnessConstants::unit()));
}
BENCHMARK(BM_QfBound)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
