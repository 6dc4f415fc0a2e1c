#include <benchmark/benchmark.h>

#include <numbers>

#include "gp2d/audit.hpp"
#include "gp2d/bessel.hpp"
#include "gp2d/kernels.hpp"

using namespace gp2d;
using std::numbers::pi;

static void BM_BesselJ0(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel::j0(x));
    x += 0.37;
    if (x > 60.0) x = 0.0;
  }
}
BENCHMARK(BM_BesselJ0);

static void BM_BesselY0(benchmark::State& state) {
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel::y0(x));
    x += 0.37;
    if (x > 60.0) x = 0.01;
  }
}
BENCHMARK(BM_BesselY0);

static void BM_NeumannGroundState(benchmark::State& state) {
  const auto pot = RadialPotential::step(2.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(neumann_ground_state(pot, 1e4).lambda);
}
BENCHMARK(BM_NeumannGroundState)->Unit(benchmark::kMillisecond);

static void BM_EtaCoefficients(benchmark::State& state) {
  const auto pot = RadialPotential::step(2.0, 1.0);
  const GPParameters params{static_cast<int>(state.range(0)), 3.0, 1.0};
  const auto sol = kernel_neumann(pot, params);
  const EtaTransform tr(sol, params);
  const auto lat = build_lattice(2.0 * pi * 16);
  for (auto _ : state) benchmark::DoNotOptimize(eta_coefficients(tr, params, lat).sup_p2);
  state.counters["points"] = static_cast<double>(lat.size());
}
BENCHMARK(BM_EtaCoefficients)->Arg(8)->Arg(14)->Unit(benchmark::kMillisecond);

static void BM_OmegaLatticeSum(benchmark::State& state) {
  const auto pot = RadialPotential::step(2.0, 1.0);
  const GPParameters params{static_cast<int>(state.range(0)), 3.0, 1.0};
  const auto sol = kernel_neumann(pot, params);
  const auto rp = renormalized_potential(params, sol.mu, sol.log_R, build_lattice(2.0 * pi));
  for (auto _ : state) benchmark::DoNotOptimize(omega_lattice_sum(rp, params, 2.0 * pi * params.N_alpha()).S);
}
BENCHMARK(BM_OmegaLatticeSum)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_Expm(benchmark::State& state) {
  const auto basis = build_basis(shell_modes(4), static_cast<int>(state.range(0)));
  const auto B = generators(basis, std::vector<double>(basis.mode_count(), -0.3)).B;
  const linalg::DenseMatrix g = B.dense();
  for (auto _ : state) benchmark::DoNotOptimize(linalg::expm(g).trace());
  state.counters["dim"] = static_cast<double>(basis.dim());
}
BENCHMARK(BM_Expm)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_MinConstant(benchmark::State& state) {
  const auto basis = build_basis(shell_modes(8), static_cast<int>(state.range(0)));
  const auto rhs = number_function(basis, [](int n) { return n + 1.0; }, "N+1");
  std::vector<double> eta(basis.mode_count(), -0.3);
  const auto lhs = conjugate(rhs, generators(basis, eta).A).op;
  for (auto _ : state) benchmark::DoNotOptimize(min_constant(lhs, {rhs}, basis, "bench").constants.front());
  state.counters["dim"] = static_cast<double>(basis.dim());
}
BENCHMARK(BM_MinConstant)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
