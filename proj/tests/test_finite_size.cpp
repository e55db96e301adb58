#include <gtest/gtest.h>

#include <cmath>

#include "tbcv/finite_size.hpp"
#include "tbcv/keyrate.hpp"

using namespace tbcv;

namespace {

ProtocolParams protocol() {
  ProtocolParams p;
  p.mu = 0.924;
  p.nu1 = 0.1;
  p.nu2 = 1e-3;
  p.tau = 2.457;
  return p;
}

ChannelParams channel(double km, double xi = 1e-3) {
  ChannelParams ch;
  ch.distance_km = km;
  ch.excess_noise_xi = xi;
  return ch;
}

// Kernel sums equal to their expectations: S_a = N p_a Y_a.
std::array<double, kIntensityLevels> expected_sums(double n, const SimulationSettings& s, const ProtocolParams& p,
                                                   const ChannelParams& ch) {
  const auto model = YieldModel::from(ch);
  const auto mus = p.intensities();
  std::array<double, kIntensityLevels> out{};
  for (int a = 0; a < kIntensityLevels; ++a) {
    const double y = observed_yield(SourceConfig::Z, mus[a], Observable::P01, model) +
                     observed_yield(SourceConfig::Z, mus[a], Observable::P10, model);
    out[a] = n * s.round_probability(a, SourceConfig::Z, BobBasis::Tomography) * y;
  }
  return out;
}

}  // namespace

TEST(Azuma, ReferenceValue) {
  EXPECT_NEAR(azuma_deviation({1e6, 1.0, 1e-10}), 3393.07, 0.01);
}

TEST(Azuma, ScalingLaws) {
  const double base = azuma_deviation({1e6, 1.0, 1e-10});
  EXPECT_NEAR(azuma_deviation({1e6, 3.5, 1e-10}), 3.5 * base, 1e-9 * base);
  EXPECT_NEAR(azuma_deviation({4e6, 1.0, 1e-10}), 2.0 * base, 1e-9 * base);
  EXPECT_LT(azuma_deviation({1e6, 1.0, 1e-5}), base);
  EXPECT_NEAR(azuma_deviation({1e6, 1.0, 1.0 - 1e-15}), 0.0, 1e-3);
}

TEST(Azuma, Validation) {
  EXPECT_THROW(azuma_deviation({0.5, 1.0, 0.1}), Error);
  EXPECT_THROW(azuma_deviation({10.0, 0.0, 0.1}), Error);
  EXPECT_THROW(azuma_deviation({10.0, 1.0, 0.0}), Error);
  EXPECT_THROW(azuma_deviation({10.0, 1.0, 1.0}), Error);
}

TEST(FiniteQ11, InfiniteSampleLimitEqualsDecoyLp) {
  const SimulationSettings s;
  const auto p = protocol();
  const auto ch = channel(10);
  const double n = 1e9;
  FiniteOptions opt;
  opt.apply_corrections = false;
  const auto r = q11_finite_from_sums(expected_sums(n, s, p, ch), n, s, p, 10.0, opt);

  // Zero-width rows at the exact yields of |01><01| + |10><10|.
  const auto model = YieldModel::from(ch);
  std::vector<IntensityInterval> rows;
  for (double mu : p.intensities()) {
    const double y = observed_yield(SourceConfig::Z, mu, Observable::P01, model) +
                     observed_yield(SourceConfig::Z, mu, Observable::P10, model);
    rows.push_back({mu, y, y});
  }
  const auto lp = lp_photon_yield_bounds(rows, 1);
  EXPECT_NEAR(r.yield1.lower, lp.lower, 1e-12);
  EXPECT_NEAR(r.yield1.upper, lp.upper, 1e-12);
  const double n_p = n * s.round_probability(0, SourceConfig::Z, BobBasis::Key);
  const double scale = region_coefficients(p.tau).c1 * poisson(p.mu, 1);
  EXPECT_NEAR(r.expected.lower / n_p, scale * lp.lower, 1e-12);
  EXPECT_NEAR(r.expected.upper / n_p, scale * lp.upper, 1e-12);
  EXPECT_EQ(r.count.lower, r.expected.lower);
  EXPECT_EQ(r.count.upper, r.expected.upper);

  // One LP on the summed observable is at least as tight as the per-observable assembly.
  const auto asym = assemble_tagged_bounds(make_yield_table(p, ch), p.tau, p.mu);
  EXPECT_GE(r.expected.lower / n_p, asym.q11.lower - 1e-12);
  EXPECT_LE(r.expected.upper / n_p, asym.q11.upper + 1e-12);
  EXPECT_NEAR(r.expected.lower / n_p / asym.q11.lower, 1.0, 1e-6);
  EXPECT_TRUE(asym.q11.contains(exact_tagged_bounds(p, ch).q11.lower, 1e-12));
}

TEST(FiniteQ11, IntervalsShrinkWithRounds) {
  const SimulationSettings s;
  const auto p = protocol();
  const auto ch = channel(10);
  const double r = observable_sample_bound(Observable::P01, standard_kernel_bounds(1.0)) +
                   observable_sample_bound(Observable::P10, standard_kernel_bounds(1.0));
  double prev_width = 2.0;
  for (double n : {1e4, 1e8, 1e10, 1e12}) {
    const auto q = q11_finite_from_sums(expected_sums(n, s, p, ch), n, s, p, r);
    EXPECT_EQ(q.applications, 2 * kIntensityLevels + 2);
    EXPECT_NEAR(q.epsilon_each, 1e-11, 1e-25);
    EXPECT_LE(q.yield1.width(), prev_width) << n;
    EXPECT_LE(q.count.lower, q.expected.lower);
    EXPECT_GE(q.count.upper, q.expected.upper);
    prev_width = q.yield1.width();
  }
  const auto small = q11_finite_from_sums(expected_sums(1e4, s, p, ch), 1e4, s, p, r);
  const auto large = q11_finite_from_sums(expected_sums(1e12, s, p, ch), 1e12, s, p, r);
  EXPECT_LT(large.yield1.width(), small.yield1.width());
}

TEST(FiniteQ11, BudgetErrors) {
  const SimulationSettings s;
  const auto p = protocol();
  const auto sums = expected_sums(1e6, s, p, channel(10));
  for (double eps : {0.0, 1.0, -1e-3}) {
    FiniteOptions opt;
    opt.epsilon_total = eps;
    try {
      q11_finite_from_sums(sums, 1e6, s, p, 5.0, opt);
      FAIL() << eps;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Budget);
    }
  }
  FiniteOptions tiny;
  tiny.epsilon_total = 4.9e-324;
  EXPECT_THROW(q11_finite_from_sums(sums, 1e6, s, p, 5.0, tiny), Error);
}

TEST(FiniteQ11, MissingTomographyRounds) {
  SimulationSettings s;
  s.intensity_probs = {1.0, 0.0, 0.0, 0.0};
  const auto p = protocol();
  try {
    q11_finite_from_sums({1, 1, 1, 1}, 1e6, s, p, 5.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
  const auto recs = RoundSimulator(p, channel(10), s, 1).simulate(1000);
  EXPECT_THROW(estimate_q11_finite(recs, s, p), Error);
}

TEST(Accumulator, CountsMatchRecords) {
  const auto p = protocol();
  const auto recs = RoundSimulator(p, channel(10), {}, 5).simulate(20000);
  const KernelLattice lattice(1.0, standard_kernel_specs());
  RoundAccumulator acc(p.tau, lattice);
  acc.add(recs);
  EXPECT_EQ(acc.rounds(), recs.size());
  std::uint64_t key = 0, accepted = 0, errors = 0, tomo = 0, tags = 0;
  for (const auto& r : recs) {
    if (r.intensity != 0) continue;
    if (r.bob_basis == BobBasis::Tomography) {
      tomo += r.alice_basis == AliceBasis::Z;
      continue;
    }
    if (r.alice_basis != AliceBasis::Z) continue;
    ++key;
    tags += r.tag == VirtualTag::One;
    const int bit = decode_key_bit(r.q1, r.q2, p.tau);
    accepted += bit >= 0;
    errors += bit >= 0 && bit != r.key_bit;
  }
  EXPECT_EQ(acc.key_rounds(0), key);
  EXPECT_EQ(acc.key_accepted(0), accepted);
  EXPECT_EQ(acc.key_errors(0), errors);
  EXPECT_EQ(acc.tomography_rounds(0, SourceConfig::Z), tomo);
  EXPECT_EQ(acc.tag_count(0, VirtualTag::One), tags);
  EXPECT_THROW(acc.tag_count(4, VirtualTag::One), Error);
  EXPECT_THROW(RoundAccumulator(0.0, lattice), Error);
}

TEST(Accumulator, SplitFoldingEqualsSingleFold) {
  const auto p = protocol();
  const auto recs = RoundSimulator(p, channel(10), {}, 6).simulate(5000);
  const KernelLattice lattice(1.0, standard_kernel_specs());
  RoundAccumulator whole(p.tau, lattice), parts(p.tau, lattice);
  whole.add(recs);
  for (const auto& r : recs) parts.add(r);
  for (auto cfg : kAllConfigs) {
    for (auto obs : kAllObservables) {
      EXPECT_EQ(whole.kernel_sum(1, cfg, obs), parts.kernel_sum(1, cfg, obs));
    }
  }
}

TEST(FiniteTagged, CountsBracketRealizedTags) {
  const auto p = protocol();
  const auto ch = channel(5);
  const SimulationSettings s;
  const auto recs = RoundSimulator(p, ch, s, 11).simulate(400000);
  const KernelLattice lattice(1.0, standard_kernel_specs());
  RoundAccumulator acc(p.tau, lattice);
  acc.add(recs);
  const auto b = finite_tagged_bounds(acc, s, p, standard_kernel_bounds(1.0));
  EXPECT_NEAR(b.epsilon_each * b.applications, 1e-10, 1e-24);
  const double q11 = acc.tag_count(0, VirtualTag::One) + acc.tag_count(0, VirtualTag::OneError);
  const double q22 = acc.tag_count(0, VirtualTag::Two) + acc.tag_count(0, VirtualTag::TwoError);
  const double vac = acc.tag_count(0, VirtualTag::Vacuum);
  EXPECT_TRUE(b.counts.q11.contains(q11)) << b.counts.q11.lower << " " << q11 << " " << b.counts.q11.upper;
  EXPECT_TRUE(b.counts.q22.contains(q22));
  EXPECT_TRUE(b.counts.q_star_0.contains(vac));
  EXPECT_EQ(b.key_rounds, static_cast<double>(acc.key_rounds(0)));
  EXPECT_NEAR(b.key_map.q_z, static_cast<double>(acc.key_accepted(0)) / b.key_rounds, 1e-15);
  EXPECT_GE(b.counts.e11.lower, 0.0);
  EXPECT_LE(b.counts.e11.upper, 1.0);
}

TEST(FiniteTagged, UncorrectedNoisySumsAreInconsistent) {
  // Without corrections, sampled sums give zero-width rows that no yield vector satisfies.
  const auto p = protocol();
  const SimulationSettings s;
  const auto recs = RoundSimulator(p, channel(5), s, 12).simulate(200000);
  const KernelLattice lattice(1.0, standard_kernel_specs());
  RoundAccumulator acc(p.tau, lattice);
  acc.add(recs);
  FiniteOptions opt;
  opt.apply_corrections = false;
  try {
    finite_tagged_bounds(acc, s, p, standard_kernel_bounds(1.0), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Inconsistent);
  }
}

TEST(FiniteKeyLength, CorrectionTerm) {
  FiniteKeyStats st;
  st.q_star_0 = 0.01;
  st.q_mm = {{1, 0.1}, {2, 0.02}};
  st.e_x_mm = {{1, 0.05}, {2, 0.1}};
  const double n = 1e8;
  const double none = finite_key_length(n, st, {}, 1.1, 0.15, 0.08);
  const double with = finite_key_length(n, st, {{1, 1e-10}, {2, 1e-10}}, 1.1, 0.15, 0.08);
  EXPECT_NEAR((with - none) / n, 2.0 * std::log2(1e-10) / n, 1e-16);
  EXPECT_NEAR((with - none) / n, -6.64e-7, 1e-9);
  EXPECT_NEAR(finite_key_length(n, st, {{1, 1.0}, {2, 1.0}}, 1.1, 0.15, 0.08), none, 1e-6);
  KeyRateInput in;
  in.f = 1.1;
  in.stats.q_star_0 = 0.01;
  in.stats.q_mm = st.q_mm;
  in.stats.e_x_mm = st.e_x_mm;
  in.stats.q_z = 0.15;
  in.stats.e_z = 0.08;
  EXPECT_NEAR(none / n, key_rate_reverse(in).raw, 1e-15);
}

TEST(FiniteKeyLength, MonotoneInRounds) {
  FiniteKeyStats st;
  st.q_star_0 = 0.01;
  st.q_mm = {{1, 0.1}};
  st.e_x_mm = {{1, 0.05}};
  double prev = -1e300;
  for (double n : {1e3, 1e5, 1e7, 1e9}) {
    const double len = finite_key_length(n, st, {{1, 1e-10}}, 1.0, 0.15, 0.05);
    EXPECT_GT(len, prev);
    prev = len;
  }
}

TEST(FiniteKeyLength, Validation) {
  FiniteKeyStats st;
  st.q_mm = {{1, 0.1}};
  EXPECT_THROW(finite_key_length(1e6, st, {}, 1.0, 0.1, 0.1), Error);
  st.e_x_mm = {{1, 0.05}};
  EXPECT_THROW(finite_key_length(0.0, st, {}, 1.0, 0.1, 0.1), Error);
  EXPECT_THROW(finite_key_length(1e6, st, {}, 0.9, 0.1, 0.1), Error);
  EXPECT_THROW(finite_key_length(1e6, st, {{1, 0.0}}, 1.0, 0.1, 0.1), Error);
}

TEST(FiniteKeyLength, StatsFromBounds) {
  TaggedBounds b;
  b.q_star_0 = {0.01, 0.02};
  b.q11 = {0.1, 0.2};
  b.q22 = {0.03, 0.04};
  b.e11 = {0.01, 0.05};
  b.e22 = {0.02, 0.07};
  const auto s = key_stats_from(b);
  EXPECT_EQ(s.q_star_0, 0.01);
  EXPECT_EQ(s.q_mm.at(1), 0.1);
  EXPECT_EQ(s.q_mm.at(2), 0.03);
  EXPECT_EQ(s.e_x_mm.at(1), 0.05);
  EXPECT_EQ(s.e_x_mm.at(2), 0.07);
}

TEST(FiniteTagged, InfiniteSampleLimitEqualsDecoyAssembly) {
  const SimulationSettings s;
  const auto p = protocol();
  ChannelParams ch = channel(10);
  ch.misalignment_delta = 5.0 * std::numbers::pi / 180.0;
  const auto model = YieldModel::from(ch);
  const auto mus = p.intensities();
  const double n = 1e9;
  const auto sums = [&](int a, SourceConfig cfg, Observable obs) {
    return n * s.round_probability(a, cfg, BobBasis::Tomography) * observed_yield(cfg, mus[a], obs, model);
  };
  FiniteOptions opt;
  opt.apply_corrections = false;
  const auto b = finite_tagged_from_sums(sums, n, s, p, standard_kernel_bounds(1.0), opt);
  const auto asym = assemble_tagged_bounds(make_yield_table(p, ch), p.tau, p.mu);
  const double n_p = n * s.round_probability(0, SourceConfig::Z, BobBasis::Key);
  EXPECT_EQ(b.key_rounds, n_p);
  const std::pair<BoundPair, BoundPair> pairs[] = {{b.per_round.q_star_0, asym.q_star_0},
                                                   {b.per_round.q11, asym.q11},
                                                   {b.per_round.q22, asym.q22},
                                                   {b.per_round.err11, asym.err11},
                                                   {b.per_round.err22, asym.err22}};
  for (const auto& [fin, ref] : pairs) {
    EXPECT_NEAR(fin.lower, ref.lower, 1e-9);
    EXPECT_NEAR(fin.upper, ref.upper, 1e-9);
  }
}

TEST(FiniteTagged, MissingConfigurationRounds) {
  SimulationSettings s;
  s.p_alice_z = 1.0;
  const auto sums = [](int, SourceConfig, Observable) { return 0.0; };
  try {
    finite_tagged_from_sums(sums, 1e6, s, protocol(), standard_kernel_bounds(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}
