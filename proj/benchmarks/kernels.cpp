#include <benchmark/benchmark.h>

#include <vector>

#include "abe/experiments.hpp"
#include "abe/propagators.hpp"
#include "abe/states.hpp"
#include "abe/tridiagonal.hpp"

using namespace abe;

namespace {

GridSpec base_grid() { return GridSpec{16.0, 32.0, 256, 512, 0.0}; }

ComplexField bump(const GridSpec& g) { return make_envelope(2.5, g, 3.0).samples; }

}  // namespace

// One Cayley half-step along x2 for every column of the base grid.
static void BM_LineSolverColumns(benchmark::State& state) {
  const GridSpec g = base_grid();
  CayleyLineSolver solver(g.points1, 0.05 / (8.0 * g.dx1() * g.dx1()));
  ComplexField f = bump(g);
  const std::vector<std::uint8_t> blocked(g.points2, 0);
  for (auto _ : state) {
    solver.advance_columns(f.data(), g.points2, blocked, {});
    benchmark::DoNotOptimize(f.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_LineSolverColumns)->Unit(benchmark::kMicrosecond);

// Full interacting step in the comoving window, obstacle and pulse on.
static void BM_InteractingStep(benchmark::State& state) {
  const GridSpec g = base_grid();
  const double v = commensurate_velocity(static_cast<double>(state.range(0)), 1.0, g);
  PhysicsSpecs physics;
  const double dt = 0.05 / (v * v);
  InteractingPropagator prop(g, physics, v, v, dt);
  ComplexField psi = boost(bump(g), 1.0, v);
  double t = -8.0 / v;
  for (auto _ : state) {
    prop.step(psi, t);
    t += dt;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_InteractingStep)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

// Spectral free evolution, forward and inverse FFT plus the symbol multiply.
static void BM_FreeEvolve(benchmark::State& state) {
  const GridSpec g = base_grid();
  FreePropagator free(g, 1.0);
  const ComplexField f = bump(g);
  for (auto _ : state) benchmark::DoNotOptimize(free.evolve(f, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_FreeEvolve)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
