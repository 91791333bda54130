#include <benchmark/benchmark.h>

#include "nhent/collapse.hpp"
#include "nhent/evolve.hpp"
#include "nhent/model.hpp"
#include "nhent/observables.hpp"
#include "nhent/rng.hpp"
#include "nhent/spectral.hpp"

using namespace nhent;

namespace {

Hamiltonian make_h(int L, double gamma, double W) {
  ModelParams p{1.0, gamma, W, L, Boundary::Open};
  return build_hamiltonian(p, sample_disorder(p, 7));
}

void bm_propagator(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const Hamiltonian h = make_h(L, -0.5, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(make_propagator(h, 2.0));
}
BENCHMARK(bm_propagator)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void bm_step(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const Propagator prop = make_propagator(make_h(L, -0.5, 2.0), 2.0);
  SlaterFrame frame = init_neel(L);
  for (auto _ : state) frame = step(frame, prop);
}
BENCHMARK(bm_step)->Arg(64)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void bm_half_cut_entropy(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const Propagator prop = make_propagator(make_h(L, -0.5, 2.0), 2.0);
  SlaterFrame frame = init_neel(L);
  for (int s = 0; s < 20; ++s) frame = step(frame, prop);
  const CorrelationMatrix c = correlation_matrix(frame);
  const Subsystem half = Subsystem::range(1, L / 2);
  for (auto _ : state) benchmark::DoNotOptimize(entanglement_entropy(c, half));
}
BENCHMARK(bm_half_cut_entropy)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void bm_eigensystem(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const Hamiltonian h = make_h(L, -0.5, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(eigensystem(h));
}
BENCHMARK(bm_eigensystem)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void bm_transfer_matrix(benchmark::State& state) {
  ModelParams p{1.0, -0.5, 3.0, 64, Boundary::Open};
  for (auto _ : state)
    benchmark::DoNotOptimize(localization_length(0.0, p, state.range(0), 3));
}
BENCHMARK(bm_transfer_matrix)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void bm_collapse_loss(benchmark::State& state) {
  CollapseDataset d;
  SplitMix64 rng(3);
  for (int L : {32, 64, 128, 256})
    for (double W = 2.0; W <= 5.0; W += 0.05)
      d.rows.push_back({W, L, std::pow(L, 0.5) / (1.0 + std::abs(W - 3.35)), 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(collapse_loss(d, 3.35, 1.9, 0.5));
}
BENCHMARK(bm_collapse_loss)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
