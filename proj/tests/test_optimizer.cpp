#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tbcv/keyrate.hpp"
#include "tbcv/optimizer.hpp"

using namespace tbcv;

namespace {

ChannelParams ideal_at(double km) {
  ChannelParams ch;
  ch.distance_km = km;
  return ch;
}

// Tabulated optima are printed to three decimals; match within one unit of the last digit.
bool contains(const std::vector<double>& grid, double v) {
  return std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(g - v) <= 1e-3; });
}

// Index of the grid point nearest to v.
std::ptrdiff_t nearest(const std::vector<double>& grid, double v) {
  std::ptrdiff_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i] - v) < std::abs(grid[best] - v)) best = static_cast<std::ptrdiff_t>(i);
  }
  return best;
}

}  // namespace

TEST(Grids, GeometricAndLinear) {
  const auto g = geometric_grid(2.0, 2.0, 4);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_DOUBLE_EQ(g[0], 0.25);
  EXPECT_DOUBLE_EQ(g[3], 2.0);
  const auto l = linear_grid(1.0, 0.5, -2, 2);
  ASSERT_EQ(l.size(), 5u);
  EXPECT_DOUBLE_EQ(l[0], 0.0);
  EXPECT_DOUBLE_EQ(l[4], 2.0);
  EXPECT_TRUE(std::is_sorted(l.begin(), l.end()));
}

TEST(Grids, DefaultSpaceContainsTabulatedOptima) {
  const auto s = default_search_space(Objective::IdealPhotons);
  for (double mu : {0.356, 1.487, 2.395, 0.137, 0.924, 1.887, 0.728, 1.172}) {
    EXPECT_TRUE(contains(s.mu, mu)) << mu;
  }
  for (double tau : {1.437, 1.641, 1.845, 3.476, 2.253, 2.457, 3.068, 3.272, 4.495, 4.699}) {
    EXPECT_TRUE(contains(s.tau, tau)) << tau;
  }
  EXPECT_EQ(s.mu.size(), 21u);
  EXPECT_EQ(s.tau.size(), 22u);
}

TEST(SearchSpace, Validation) {
  SearchSpace s;
  EXPECT_THROW(s.validate(), Error);
  s.mu = {1.0};
  s.tau = {-1.0};
  EXPECT_THROW(s.validate(), Error);
  s.tau = {1.0};
  EXPECT_NO_THROW(s.validate());
  s.photons = 0;
  EXPECT_THROW(s.validate(), Error);
  s.photons = 2;
  s.f = 0.5;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_THROW(parse_objective("nope"), Error);
  for (auto o : {Objective::IdealPhotons, Objective::Decoy, Objective::InfiniteDecoy}) {
    EXPECT_EQ(parse_objective(objective_id(o)), o);
  }
}

TEST(Optimize, TwoPhotonZeroKmWithinOneGridStep) {
  const auto s = default_search_space(Objective::IdealPhotons, 2);
  const auto r = optimize(s, ideal_at(0));
  EXPECT_TRUE(r.positive);
  EXPECT_EQ(r.evaluations, s.mu.size() * s.tau.size());
  EXPECT_LE(std::abs(nearest(s.mu, r.best.mu) - nearest(s.mu, 1.487)), 1) << r.best.mu;
  EXPECT_LE(std::abs(nearest(s.tau, r.best.tau) - nearest(s.tau, 1.641)), 1) << r.best.tau;
}

TEST(Optimize, SinglePhotonFortyKmHasNoPositiveRate) {
  const auto s = default_search_space(Objective::IdealPhotons, 1);
  const auto r = optimize(s, ideal_at(40));
  EXPECT_FALSE(r.positive);
  EXPECT_LE(r.rate, 0.0);
}

TEST(Optimize, SinglePointGrid) {
  SearchSpace s;
  s.mu = {1.487};
  s.tau = {1.641};
  const auto r = optimize(s, ideal_at(0));
  EXPECT_EQ(r.evaluations, 1u);
  EXPECT_EQ(r.best.mu, 1.487);
  EXPECT_EQ(r.best.tau, 1.641);
  EXPECT_EQ(r.rate, i_photon_key_rate(2, 1.487, 1.641, ideal_at(0)).raw);
}

TEST(Optimize, ReportedRateIsReproducible) {
  const auto s = default_search_space(Objective::IdealPhotons, 3);
  const auto r = optimize(s, ideal_at(10));
  const auto e = evaluate_objective(s, ideal_at(10), r.best);
  EXPECT_EQ(r.rate, e.rate);
  EXPECT_EQ(r.e_z, e.e_z);
  EXPECT_EQ(r.rate, i_photon_key_rate(3, r.best.mu, r.best.tau, ideal_at(10)).raw);
}

TEST(Optimize, AddingPointsNeverLowersTheOptimum) {
  SearchSpace coarse;
  coarse.mu = {0.5, 1.5};
  coarse.tau = {1.5, 2.5};
  SearchSpace fine = coarse;
  fine.mu = {0.5, 0.9, 1.5, 2.0};
  fine.tau = {1.5, 1.9, 2.5};
  for (double km : {0.0, 10.0, 20.0}) {
    EXPECT_GE(optimize(fine, ideal_at(km)).rate, optimize(coarse, ideal_at(km)).rate) << km;
  }
}

TEST(Optimize, ThreadCountDoesNotChangeResult) {
  const auto s = default_search_space(Objective::IdealPhotons, 2);
  const auto a = optimize(s, ideal_at(20), 1);
  const auto b = optimize(s, ideal_at(20), 3);
  EXPECT_EQ(a.rate, b.rate);
  EXPECT_EQ(a.best.mu, b.best.mu);
  EXPECT_EQ(a.best.tau, b.best.tau);
}

TEST(Optimize, GridOptimumDominatesEveryPoint) {
  SearchSpace s;
  s.mu = geometric_grid(2.395, 1.2691, 8);
  s.tau = linear_grid(1.437, 0.2039, 0, 6);
  const auto r = optimize(s, ideal_at(5));
  for (double mu : s.mu) {
    for (double tau : s.tau) EXPECT_GE(r.rate, evaluate_objective(s, ideal_at(5), {mu, tau, 0, 0}).rate);
  }
}

TEST(Optimize, RefinementNeverWorsens) {
  SearchSpace s;
  s.mu = geometric_grid(2.395, 1.2691, 8);
  s.tau = linear_grid(1.437, 0.2039, 0, 6);
  const auto grid = optimize(s, ideal_at(10));
  s.refine_sweeps = 2;
  const auto refined = optimize(s, ideal_at(10));
  EXPECT_GE(refined.rate, grid.rate);
}

TEST(Optimize, InfiniteDecoyObjectiveMatchesDirectRate) {
  SearchSpace s;
  s.objective = Objective::InfiniteDecoy;
  s.mu = {0.924};
  s.tau = {2.457};
  ChannelParams ch = ideal_at(10);
  ch.excess_noise_xi = 1e-3;
  ch.misalignment_delta = 5.0 * std::numbers::pi / 180.0;
  const auto r = optimize(s, ch);
  ProtocolParams p;
  p.mu = 0.924;
  p.tau = 2.457;
  EXPECT_EQ(r.rate, infinite_decoy_key_rate(p, ch).raw);
}

TEST(OptimumCsv, HeaderAndRow) {
  std::ostringstream os;
  write_optimum_header(os);
  OptimizeResult r;
  r.best = {1.487, 1.641, 0.0, 0.0};
  r.rate = 0.123456789123;
  r.e_z = 0.1052;
  write_optimum_row(os, 0.0, r);
  EXPECT_EQ(os.str(), "distance_km,mu,tau,nu1,nu2,rate,e_z\n0,1.487,1.641,0,0,0.123456789,0.1052\n");
}
