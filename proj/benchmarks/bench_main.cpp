#include "bpplab/barrier.hpp"
#include "bpplab/counterexamples.hpp"
#include "bpplab/fdlab.hpp"
#include "bpplab/geometry.hpp"
#include "bpplab/weight.hpp"

#include <benchmark/benchmark.h>

using namespace bpplab;

static void BM_SecondIntegralQuadrature(benchmark::State& state) {
  const auto w = RadialWeight::power(2.0, 0.1 * static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(w.integrate_second_by_quadrature(0.37));
}
BENCHMARK(BM_SecondIntegralQuadrature)->Arg(1)->Arg(5)->Arg(9);

static void BM_TabulatedIntegral(benchmark::State& state) {
  const auto w = RadialWeight::sampled(RadialWeight::power(2.0, 0.5), 1e-6, 1.0,
                                       static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(w.integrate_second(0.5));
}
BENCHMARK(BM_TabulatedIntegral)->Arg(64)->Arg(1024);

static void BM_ResidualCheck(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto w = RadialWeight::power(2.0, 0.5);
  const auto b = Barrier::with_admissible_epsilon(n, 2.0, 1.0, w);
  const auto coeffs = adversarial_coefficients(n, {Vector::Zero(n), 2.0}, w, 0.5);
  const auto samples = annulus_samples(b, 10000, 0);
  for (auto _ : state) benchmark::DoNotOptimize(residual_check(b, coeffs, samples));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_ResidualCheck)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_SolveSingularAnnulus(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const auto w = RadialWeight::power(2.0, 0.5);
  const auto coeffs = make_coefficient_family({{"family", "singular_c"}}, 2,
                                              {make_vector({0.0, 0.0}), 2.0}, w);
  auto grid = std::make_shared<const Grid>(Grid::polar_annulus(1.0, 2.0, cells, 2 * cells));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_dirichlet(coeffs, grid, [](const Vector& x) { return x.norm() < 1.5 ? 1.0 : 0.0; }));
  }
}
BENCHMARK(BM_SolveSingularAnnulus)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Falsification(benchmark::State& state) {
  const auto scene = SingularSetScene::preset("line_family");
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(falsify_outward_ball(scene, h));
}
BENCHMARK(BM_Falsification)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_CaseEvaluation(benchmark::State& state) {
  const auto study = instantiate(static_cast<CaseId>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(study));
}
BENCHMARK(BM_CaseEvaluation)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
