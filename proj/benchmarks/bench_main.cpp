#include <benchmark/benchmark.h>

#include "spectom/forward.hpp"
#include "spectom/kernel.hpp"
#include "spectom/recon.hpp"
#include "spectom/rng.hpp"

using namespace spectom;

namespace {

ImagingGeometry bench_geometry(int nx, int nz, int nk, int nf) {
  ImagingGeometry g;
  g.nx = nx;
  g.nz = nz;
  g.nk = nk;
  g.lx = 50.0;
  g.lz = 40.0;
  g.kmin = 0.7;
  g.kmax = 2.1;
  g.na = 0.5;
  for (int f = 0; f < nf; ++f)
    g.focal_planes.push_back(g.lz * (f + 1) / (nf + 1));
  return g;
}

SpectraMatrix bench_spectra(const ImagingGeometry& g, int ns) {
  SubstreamRng rng(42, "bench-spectra");
  SpectraMatrix h(g.nk, ns);
  for (int s = 0; s < ns; ++s)
    for (int m = 0; m < g.nk; ++m) h(m, s) = Complex(rng.normal(), rng.normal());
  return h;
}

DensityStack bench_density(const ImagingGeometry& g, int ns) {
  SubstreamRng rng(43, "bench-density");
  DensityStack p(ns, g.nx, g.nz);
  for (auto& v : p.values) v = Complex(rng.normal(), rng.normal());
  return p;
}

void BM_KernelTableBuild(benchmark::State& state) {
  ImagingGeometry g =
      bench_geometry(static_cast<int>(state.range(0)), 96, 96, 3);
  for (auto _ : state) {
    KernelTable table = build_kernel_table(g);
    benchmark::DoNotOptimize(table.coefficients.data());
  }
}
BENCHMARK(BM_KernelTableBuild)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ForwardApply(benchmark::State& state) {
  const int ns = static_cast<int>(state.range(0));
  ImagingGeometry g = bench_geometry(64, 96, 96, 3);
  KernelTable table = build_kernel_table(g);
  SpectraMatrix h = bench_spectra(g, ns);
  DensityStack p = bench_density(g, ns);
  for (auto _ : state) {
    MeasurementStack y = apply_forward(p, h, table);
    benchmark::DoNotOptimize(y.values.data());
  }
}
BENCHMARK(BM_ForwardApply)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_AdjointApply(benchmark::State& state) {
  const int ns = static_cast<int>(state.range(0));
  ImagingGeometry g = bench_geometry(64, 96, 96, 3);
  KernelTable table = build_kernel_table(g);
  SpectraMatrix h = bench_spectra(g, ns);
  MeasurementStack y = apply_forward(bench_density(g, ns), h, table);
  for (auto _ : state) {
    DensityStack p = apply_adjoint(y, h, table);
    benchmark::DoNotOptimize(p.values.data());
  }
}
BENCHMARK(BM_AdjointApply)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_BlockAssemble(benchmark::State& state) {
  ImagingGeometry g = bench_geometry(64, 96, 96, 3);
  KernelTable table = build_kernel_table(g);
  SpectraMatrix h = bench_spectra(g, 3);
  for (auto _ : state) {
    CMatrix phi = assemble_block(0, h, table);
    benchmark::DoNotOptimize(phi.data());
  }
}
BENCHMARK(BM_BlockAssemble)->Unit(benchmark::kMillisecond);

void BM_RidgeSolve(benchmark::State& state) {
  ImagingGeometry g = bench_geometry(32, 48, 48, 2);
  KernelTable table = build_kernel_table(g);
  SpectraMatrix h = bench_spectra(g, 2);
  MeasurementStack s = apply_forward(bench_density(g, 2), h, table);
  ReconConfig cfg;
  cfg.lambda_r = 1e-3;
  cfg.max_iters = static_cast<int>(state.range(0));
  cfg.cg_tol = 0.0;
  for (auto _ : state) {
    ReconResult res = solve_tikhonov(s, h, table, cfg);
    benchmark::DoNotOptimize(res.densities.values.data());
  }
}
BENCHMARK(BM_RidgeSolve)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
