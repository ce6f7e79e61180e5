#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "demailly/homotopy.hpp"

namespace {

using namespace demailly;

ScalarField smooth_field(const Grid& g) {
  return ScalarField::sample(g, [](double x, double y) {
    return 0.1 * std::sin(2 * std::numbers::pi * x) * std::cos(4 * std::numbers::pi * y);
  });
}

ParamsRequest request() {
  ParamsRequest req;
  req.lambda = 8.0;
  req.alpha0 = 10.0;
  return req;
}

void BM_Laplacian(benchmark::State& st) {
  const Grid g = make_grid(static_cast<int>(st.range(0)), 4.0);
  const ScalarField v = smooth_field(g);
  for (auto _ : st) benchmark::DoNotOptimize(laplacian(v));
}
BENCHMARK(BM_Laplacian)->RangeMultiplier(2)->Range(16, 256);

void BM_SolveHelmholtz(benchmark::State& st) {
  const Grid g = make_grid(static_cast<int>(st.range(0)), 4.0);
  const ScalarField c = exp(smooth_field(g));
  const ScalarField rhs = smooth_field(g) + 0.3;
  for (auto _ : st) benchmark::DoNotOptimize(solve_helmholtz(c, rhs));
}
BENCHMARK(BM_SolveHelmholtz)->RangeMultiplier(2)->Range(16, 128);

void BM_NewtonAtT(benchmark::State& st) {
  const Grid g = make_grid(static_cast<int>(st.range(0)), 4.0);
  const CurvatureData curv = build_curvature(BundleSpec::cosine_pair({1, 3}, 0.2, {{1, 1}}), g);
  const T0Solution t0 = solve_t0(curv, request());
  for (auto _ : st) benchmark::DoNotOptimize(newton_at_t(t0.state, 0.05, curv, t0.params));
}
BENCHMARK(BM_NewtonAtT)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);

void BM_March(benchmark::State& st) {
  const Grid g = make_grid(static_cast<int>(st.range(0)), 4.0);
  const BundleSpec spec = BundleSpec::cosine_pair({1, 3}, 0.2, {{1, 1}});
  for (auto _ : st) benchmark::DoNotOptimize(march(spec, request(), g));
}
BENCHMARK(BM_March)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
