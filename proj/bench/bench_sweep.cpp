// Serial reference vs OpenMP fan-out for sweep grids, and the two integrators
// on a single trajectory.

#include <benchmark/benchmark.h>

#include "srswitch/dynamics.hpp"
#include "srswitch/network.hpp"
#include "srswitch/sweep.hpp"

using namespace srswitch;

namespace {

const SiteNetwork& multimer() {
  static const SiteNetwork net = build_multimer(kDefaultOmega, kDefaultOmegaSp, 0.0, 0.0);
  return net;
}

// 16 x 16 = 256 points over the default 2D window.
std::vector<KappaPoint> grid_points() {
  std::vector<KappaPoint> pts;
  for (double a : log_grid(1e-2, 1e2, 16))
    for (double b : log_grid(1e-2, 1e2, 16)) pts.emplace_back(a, b);
  return pts;
}

SweepSpec spec_for(Law law) {
  SweepSpec s;
  s.law = law;
  if (law == Law::lindblad) s.bath = BathSpec{};
  return s;
}

void BM_GridSerial(benchmark::State& state) {
  const PointEvaluator eval(multimer(), spec_for(static_cast<Law>(state.range(0))));
  const auto pts = grid_points();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_points_serial(eval, pts));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pts.size()));
}

void BM_GridParallel(benchmark::State& state) {
  const PointEvaluator eval(multimer(), spec_for(static_cast<Law>(state.range(0))));
  const auto pts = grid_points();
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_points(eval, pts, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pts.size()));
}

void BM_Trajectory(benchmark::State& state) {
  const double kappa = static_cast<double>(state.range(1));
  const auto net = multimer().with_kappas(kappa, kappa / kDefaultQ);
  const auto rho0 = initial_state(net, InitialState{});
  EvolutionOptions opt;
  opt.integrator = static_cast<Integrator>(state.range(0));
  opt.record_trajectory = false;
  for (auto _ : state) benchmark::DoNotOptimize(evolve_von_neumann(net, rho0, opt));
}

}  // namespace

BENCHMARK(BM_GridSerial)->Arg(static_cast<int>(Law::von_neumann))->Arg(static_cast<int>(Law::lindblad))
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridParallel)
    ->ArgsProduct({{static_cast<int>(Law::von_neumann), static_cast<int>(Law::lindblad)}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_Trajectory)
    ->ArgsProduct({{static_cast<int>(Integrator::exact), static_cast<int>(Integrator::rk4)}, {1, 10}})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
