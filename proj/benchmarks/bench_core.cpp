#include <benchmark/benchmark.h>

#include <numbers>

#include "tbcv/channel.hpp"
#include "tbcv/decoy.hpp"
#include "tbcv/finite_size.hpp"
#include "tbcv/optimizer.hpp"
#include "tbcv/rounds.hpp"
#include "tbcv/specfun.hpp"
#include "tbcv/tomo.hpp"

using namespace tbcv;

namespace {

ChannelParams practical(double km) {
  ChannelParams ch;
  ch.distance_km = km;
  ch.excess_noise_xi = 1e-3;
  ch.misalignment_delta = 5.0 * std::numbers::pi / 180.0;
  return ch;
}

ProtocolParams protocol() {
  ProtocolParams p;
  p.mu = 0.924;
  p.nu1 = 2.993e-2;
  p.nu2 = 1e-4;
  p.tau = 2.457;
  return p;
}

}  // namespace

static void BM_RegionCoefficients(benchmark::State& state) {
  double tau = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(region_coefficients(tau));
    tau = tau < 4.0 ? tau + 0.01 : 1.0;
  }
}
BENCHMARK(BM_RegionCoefficients);

static void BM_ZGainAndError(benchmark::State& state) {
  const double eta = practical(10).transmittance();
  for (auto _ : state) benchmark::DoNotOptimize(z_gain_and_error(0.924, eta, 1e-3, 2.457));
}
BENCHMARK(BM_ZGainAndError);

static void BM_KernelRadialExact(benchmark::State& state) {
  const KernelSpec spec{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 0.9};
  double q = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_radial(spec, q));
    q = q < 4.0 ? q + 0.01 : -4.0;
  }
}
BENCHMARK(BM_KernelRadialExact)->Args({0, 0})->Args({2, 0})->Args({0, 2});

static void BM_KernelLatticeLookup(benchmark::State& state) {
  const KernelLattice lattice(1.0, standard_kernel_specs());
  double q = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(standard_kernels(lattice, q, 0.3));
    q = q < 4.0 ? q + 0.01 : -4.0;
  }
}
BENCHMARK(BM_KernelLatticeLookup);

static void BM_EstimateObservables(benchmark::State& state) {
  const KernelLattice lattice(1.0, standard_kernel_specs());
  YieldModel model;
  model.eta = 0.63;
  const auto recs = sample_source_records(SourceConfig::Phi0, 0.924, model, 1.0,
                                          static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_observables(recs, lattice));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateObservables)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

static void BM_DecoyLp(benchmark::State& state) {
  const auto model = YieldModel::from(practical(10));
  std::vector<IntensityInterval> rows;
  for (double mu : protocol().intensities()) {
    const double y = observed_yield(SourceConfig::Z, mu, Observable::P01, model);
    rows.push_back({mu, y, y});
  }
  for (auto _ : state) benchmark::DoNotOptimize(lp_photon_yield_bounds(rows, 1));
}
BENCHMARK(BM_DecoyLp);

static void BM_KeyRateWithDecoy(benchmark::State& state) {
  const auto table = make_yield_table(protocol(), practical(10));
  for (auto _ : state) benchmark::DoNotOptimize(key_rate_with_decoy(table, protocol()));
}
BENCHMARK(BM_KeyRateWithDecoy)->Unit(benchmark::kMicrosecond);

static void BM_InfiniteDecoyRate(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(infinite_decoy_key_rate(protocol(), practical(10)));
}
BENCHMARK(BM_InfiniteDecoyRate)->Unit(benchmark::kMicrosecond);

static void BM_OptimizeIdealTwoPhoton(benchmark::State& state) {
  const auto space = default_search_space(Objective::IdealPhotons, 2);
  ChannelParams ch;
  ch.distance_km = 10;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(space, ch));
}
BENCHMARK(BM_OptimizeIdealTwoPhoton)->Unit(benchmark::kMillisecond);

static void BM_SimulateRoundBlock(benchmark::State& state) {
  const RoundSimulator sim(protocol(), practical(10), {}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sim.block(0, kRoundBlock));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kRoundBlock));
}
BENCHMARK(BM_SimulateRoundBlock)->Unit(benchmark::kMillisecond);

static void BM_AccumulateRounds(benchmark::State& state) {
  const KernelLattice lattice(1.0, standard_kernel_specs());
  const auto recs = RoundSimulator(protocol(), practical(10), {}, 2).block(0, kRoundBlock);
  for (auto _ : state) {
    RoundAccumulator acc(protocol().tau, lattice);
    acc.add(recs);
    benchmark::DoNotOptimize(acc.rounds());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(recs.size()));
}
BENCHMARK(BM_AccumulateRounds)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
