#include <benchmark/benchmark.h>

#include "crw/chain.hpp"
#include "crw/crw_sim.hpp"
#include "crw/meeting.hpp"
#include "crw/rings.hpp"
#include "crw/voter.hpp"

using namespace crw;

namespace {

void BM_RingSampleUniform(benchmark::State& state) {
  const MarkovChain c = build_generator(make_torus(3, 10));
  const RingSampler rings(c);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(rings.sample(rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RingSampleUniform);

void BM_RingSampleAlias(benchmark::State& state) {
  Rng graph_rng(2);
  const MarkovChain c = build_generator(
      sample_configuration_model(DegreeDistribution::uniform(3, 6), 20000, graph_rng, {.require_connected = true}));
  const RingSampler rings(c);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(rings.sample(rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RingSampleAlias);

// One CRW trajectory on torus(3, L) up to t = 15; items are ring events.
void BM_CrwTorus(benchmark::State& state) {
  const MarkovChain c = build_generator(make_torus(3, static_cast<int>(state.range(0))));
  const RingSampler rings(c);
  const double grid[] = {15.0};
  std::uint64_t seed = 0, events = 0;
  for (auto _ : state) {
    Rng rng(seed++);
    events += simulate_crw(rings, grid, rng).events;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(BM_CrwTorus)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_CrwCycle(benchmark::State& state) {
  const MarkovChain c = build_generator(make_cycle(100000), RateConvention::TotalUnit);
  const RingSampler rings(c);
  const double grid[] = {static_cast<double>(state.range(0))};
  std::uint64_t seed = 0, events = 0;
  for (auto _ : state) {
    Rng rng(seed++);
    events += simulate_crw(rings, grid, rng).events;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(BM_CrwCycle)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_VoterTorus(benchmark::State& state) {
  const MarkovChain c = build_generator(make_torus(3, 10));
  const RingSampler rings(c);
  const double grid[] = {15.0};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(simulate_voter(rings, grid, rng));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rings.total_rate() * 15.0));
}
BENCHMARK(BM_VoterTorus)->Unit(benchmark::kMillisecond);

void BM_PairwiseMeeting(benchmark::State& state) {
  const MarkovChain c = build_generator(make_torus(3, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_meeting_times(c).t_meet_pi);
}
BENCHMARK(BM_PairwiseMeeting)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_SubsetChain(benchmark::State& state) {
  const MarkovChain c = build_generator(make_cycle(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(exact_occupancy_density(c, 1.0));
}
BENCHMARK(BM_SubsetChain)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
