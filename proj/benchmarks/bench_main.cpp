#include <benchmark/benchmark.h>

#include <random>

#include "mrt/bump.hpp"
#include "mrt/cgo.hpp"
#include "mrt/field_ops.hpp"
#include "mrt/mrt_inversion.hpp"
#include "mrt/ray_transform.hpp"
#include "mrt/recovery.hpp"
#include "mrt/tensor_algebra.hpp"

using namespace mrt;

namespace {

GridGeometry cube(int res) {
  return make_grid({res + 1, res + 1, res + 1}, {-0.5, -0.5, -0.5}, {1.0 / res, 1.0 / res, 1.0 / res});
}

SymTensor random_symtensor(int dim, int rank, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  SymTensor t(dim, rank);
  for (std::size_t c = 0; c < t.size(); ++c) t[c] = Complex{uni(rng), uni(rng)};
  return t;
}

}  // namespace

static void BM_SymProduct(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int m = static_cast<int>(state.range(0));
  SymTensor f = random_symtensor(3, m, rng);
  SymTensor g = random_symtensor(3, 2, rng);
  for (auto _ : state) {
    SymTensor p = sym_product(f, g);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_SymProduct)->Arg(1)->Arg(2)->Arg(3);

static void BM_EvalPower(benchmark::State& state) {
  std::mt19937_64 rng(2);
  SymTensor f = random_symtensor(3, static_cast<int>(state.range(0)), rng);
  CVec w{Complex{1.0, 0.0}, Complex{0.3, 0.7}, Complex{-0.2, 0.1}};
  for (auto _ : state) {
    Complex v = eval_power(f, w);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_EvalPower)->Arg(2)->Arg(4);

static void BM_IsotropyProject(benchmark::State& state) {
  std::mt19937_64 rng(3);
  SymTensor f = random_symtensor(3, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    auto p = isotropy_project(f);
    benchmark::DoNotOptimize(p.residual);
  }
}
BENCHMARK(BM_IsotropyProject)->Arg(2)->Arg(3);

static void BM_RayTransform(benchmark::State& state) {
  const GridGeometry g = cube(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(4);
  GridField f = random_tensor_bump(g, 1, default_bump(g), rng);
  Ray ray;
  ray.base = {0.05, -0.02, 0.01};
  ray.dir = {1.0, 0.4, -0.3};
  for (auto _ : state) {
    Complex v = ray_transform(f, ray);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_RayTransform)->Arg(32)->Arg(64);

static void BM_SaintVenantMax(benchmark::State& state) {
  const GridGeometry g = cube(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(5);
  GridField v = random_tensor_bump(g, 1, default_bump(g), rng);
  GridField u = inner_derivative(v);
  for (auto _ : state) {
    double m = saint_venant_max_abs(u);
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_SaintVenantMax)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_ComplexMoment(benchmark::State& state) {
  const GridGeometry g = cube(32);
  std::mt19937_64 rng(6);
  GridField f = random_tensor_bump(g, 2, default_bump(g), rng);
  const auto dirs = eta_circle(16);
  for (auto _ : state) {
    Complex v = complex_moment(f, 1, dirs[3], RVec{0.1});
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ComplexMoment);

static void BM_MomentScan(benchmark::State& state) {
  const GridGeometry g = shipped_half_grid(static_cast<int>(state.range(0)));
  const ExtendedCoefficientSet ext = extend(shipped_bump_set(2, g));
  const auto dirs = eta_circle(16);
  const BumpProfile gprof = pipeline_g_profile(0.0);
  const MomentScan scan = make_moment_scan(ext.order(1), dirs[5]);
  for (auto _ : state) {
    Complex v = scan.value(1, 0.5, 0.5, &gprof);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_MomentScan)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_LimitingIntegral(benchmark::State& state) {
  const GridGeometry g = shipped_half_grid(static_cast<int>(state.range(0)));
  const ExtendedCoefficientSet ext = extend(shipped_bump_set(2, g));
  const PhaseBundle bundle = build_phases(RVec{0, 0, 1}, RVec{1, 0, 0}, RVec{0, 2, 0}, 0.05);
  const RotatedFrame frame = RotatedFrame::from_eta(RVec{0, 1, 0});
  const Amplitude unit{frame, Complex{1, 0}, 0, 0.0, std::nullopt};
  for (auto _ : state) {
    LimitTerms t = limiting_integral(ext, bundle, unit, unit, 0);
    benchmark::DoNotOptimize(t.main_zero);
  }
}
BENCHMARK(BM_LimitingIntegral)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
