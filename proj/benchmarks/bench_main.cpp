#include <benchmark/benchmark.h>

#include "rkm/ensembles.hpp"
#include "rkm/kernel_matrix.hpp"
#include "rkm/limit_solver.hpp"
#include "rkm/mp_theory.hpp"
#include "rkm/orthopoly.hpp"
#include "rkm/spectral.hpp"

namespace {

void BM_SampleMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rkm::sample_matrix({rkm::Family::GaussianIID, n / 2}, n, 1));
  }
}
BENCHMARK(BM_SampleMatrix)->Arg(200)->Arg(800);

void BM_BuildKernel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto s = rkm::sample_matrix({rkm::Family::GaussianIID, n / 2}, n, 1);
  const rkm::KernelSpec spec{rkm::KernelKind::InnerProduct, rkm::Diagonal::Zero, rkm::envelopes::exponential(1.0)};
  for (auto _ : state) benchmark::DoNotOptimize(rkm::build(spec, s));
}
BENCHMARK(BM_BuildKernel)->Arg(200)->Arg(800);

void BM_Eigenvalues(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto s = rkm::sample_matrix({rkm::Family::GaussianIID, n / 2}, n, 1);
  const auto k = rkm::build({rkm::KernelKind::InnerProduct, rkm::Diagonal::Keep, rkm::envelopes::identity()}, s);
  for (auto _ : state) benchmark::DoNotOptimize(rkm::eigenvalues(k));
}
BENCHMARK(BM_Eigenvalues)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_MpCdf(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rkm::mp_cdf(0.5, x));
    x = x > 5.0 ? 0.1 : x + 0.37;
  }
}
BENCHMARK(BM_MpCdf);

void BM_SolvePoint(benchmark::State& state) {
  const rkm::LimitParams params{0.8, 1.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(rkm::solve_point(params, {0.3, 0.01}));
}
BENCHMARK(BM_SolvePoint);

void BM_SolveGrid(benchmark::State& state) {
  rkm::GridOptions options;
  options.n_points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rkm::solve_grid({0.8, 1.0, 1.0}, options));
}
BENCHMARK(BM_SolveGrid)->Arg(1001)->Arg(4001)->Unit(benchmark::kMillisecond);

void BM_EnvelopeCoeffs(benchmark::State& state) {
  const auto f = rkm::envelopes::sign_scaled();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rkm::envelope_coeffs(f, {rkm::Family::RademacherIID, 400}, 4, state.range(0), 3));
  }
}
BENCHMARK(BM_EnvelopeCoeffs)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
