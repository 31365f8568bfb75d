#include <benchmark/benchmark.h>

#include "ssflab/birman_schwinger.hpp"
#include "ssflab/special_functions.hpp"
#include "ssflab/spectra.hpp"
#include "ssflab/ssf.hpp"

using namespace ssflab;

namespace {

const PotentialSpec& well() {
  static const PotentialSpec v = PotentialSpec::square_well(1, 2.0, 1.0);
  return v;
}

void BM_Hankel(benchmark::State& state) {
  cplx w{0.3, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hankel1_0(w));
    w += cplx{1e-6, 1e-7};
  }
}
BENCHMARK(BM_Hankel);

void BM_IntervalGreen(benchmark::State& state) {
  const auto z = Energy::off_axis(cplx{2.0, 0.5});
  double x = -0.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(interval_dirichlet_green(z, -1.0, 1.0, x, 0.3));
    x = x > 0.9 ? -0.9 : x + 1e-4;
  }
}
BENCHMARK(BM_IntervalGreen);

void BM_FredholmDet(benchmark::State& state) {
  const auto pair = factorize(well());
  const auto grid = default_grid(pair, static_cast<int>(state.range(0)));
  const auto kernel = KernelId::full_space(1);
  const auto z = Energy::off_axis(cplx{1.0, 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(fredholm_det(assemble(kernel, pair, grid, z)));
  state.SetLabel(std::to_string(grid.size()) + " nodes");
}
BENCHMARK(BM_FredholmDet)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RadialDet2(benchmark::State& state) {
  const auto v = PotentialSpec::square_well(3, 5.0, 1.0);
  const auto pair = factorize(v);
  const auto grid = default_grid(pair, 32);
  const auto kernel = KernelId::full_space(3);
  const auto z = Energy::off_axis(cplx{4.0, 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(det2_radial(kernel, pair, grid, z).log_value);
}
BENCHMARK(BM_RadialDet2)->Unit(benchmark::kMillisecond);

void BM_CountInterval(benchmark::State& state) {
  const double lambda = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(count_interval(well(), -20.0, 20.0, lambda).count);
}
BENCHMARK(BM_CountInterval)->Arg(1)->Arg(100)->Arg(2500)->Unit(benchmark::kMicrosecond);

void BM_SsfDetPoint(benchmark::State& state) {
  const auto kernel = KernelId::full_space(1);
  for (auto _ : state) benchmark::DoNotOptimize(ssf_det(well(), kernel, {1.0}).values);
}
BENCHMARK(BM_SsfDetPoint)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
