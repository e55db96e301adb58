#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "tbcv/channel.hpp"
#include "tbcv/rounds.hpp"
#include "tbcv/tomo.hpp"

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

ChannelParams channel(double km, double xi = 0.0, double delta = 0.0) {
  ChannelParams ch;
  ch.distance_km = km;
  ch.excess_noise_xi = xi;
  ch.misalignment_delta = delta;
  return ch;
}

bool same(const RoundRecord& a, const RoundRecord& b) {
  return a.intensity == b.intensity && a.alice_basis == b.alice_basis && a.key_bit == b.key_bit &&
         a.phase_index == b.phase_index && a.bob_basis == b.bob_basis && a.tag == b.tag &&
         a.phi1 == b.phi1 && a.q1 == b.q1 && a.phi2 == b.phi2 && a.q2 == b.q2;
}

}  // namespace

TEST(KeyMap, DecodeRules) {
  EXPECT_EQ(decode_key_bit(2.0, 0.1, 1.5), 0);
  EXPECT_EQ(decode_key_bit(-0.3, -2.0, 1.5), 1);
  EXPECT_EQ(decode_key_bit(2.0, -2.0, 1.5), -1);
  EXPECT_EQ(decode_key_bit(0.2, 0.4, 1.5), -1);
  EXPECT_EQ(decode_key_bit(1.5, 0.0, 1.5), -1);
}

TEST(Settings, RoundProbabilitiesSumToOne) {
  SimulationSettings s;
  s.intensity_probs = {0.5, 0.2, 0.2, 0.1};
  s.p_alice_z = 0.6;
  s.p_bob_key = 0.7;
  double total = 0.0;
  for (int a = 0; a < kIntensityLevels; ++a) {
    for (auto cfg : kAllConfigs) {
      for (auto bob : {BobBasis::Key, BobBasis::Tomography}) total += s.round_probability(a, cfg, bob);
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(s.round_probability(1, SourceConfig::Phi90, BobBasis::Tomography), 0.2 * 0.1 * 0.3, 1e-16);
  EXPECT_THROW(s.round_probability(4, SourceConfig::Z, BobBasis::Key), Error);
}

TEST(Settings, Validation) {
  SimulationSettings s;
  s.intensity_probs = {0.7, 0.1, 0.1, 0.2};
  EXPECT_THROW(s.validate(), Error);
  s.intensity_probs = {0.7, 0.1, 0.1, 0.1};
  s.p_bob_key = 1.2;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_THROW(RoundSimulator(protocol(), channel(10), s, 1), Error);
}

TEST(VirtualTags, ProbabilitiesNormalizedAndVacuumOnly) {
  const auto p = virtual_tag_probabilities(0.924, protocol(), channel(10, 1e-3));
  double total = 0.0;
  for (double v : p) {
    EXPECT_GE(v, 0.0);
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  const auto vac = virtual_tag_probabilities(0.0, protocol(), channel(10, 1e-3));
  EXPECT_EQ(vac[static_cast<int>(VirtualTag::One)], 0.0);
  EXPECT_EQ(vac[static_cast<int>(VirtualTag::Two)], 0.0);
  EXPECT_GT(vac[static_cast<int>(VirtualTag::Vacuum)], 0.0);
}

TEST(Simulator, IndependentOfBlockSplitAndThreads) {
  const RoundSimulator sim(protocol(), channel(10, 1e-3), {}, 42);
  const std::size_t total = 2 * kRoundBlock + 123;
  const auto one = sim.simulate(total, 1);
  const auto three = sim.simulate(total, 3);
  ASSERT_EQ(one.size(), total);
  ASSERT_EQ(three.size(), total);
  for (std::size_t i = 0; i < total; ++i) ASSERT_TRUE(same(one[i], three[i])) << i;
  const auto b2 = sim.block(2, total);
  ASSERT_EQ(b2.size(), 123u);
  for (std::size_t i = 0; i < b2.size(); ++i) ASSERT_TRUE(same(b2[i], one[2 * kRoundBlock + i]));
  // A longer run extends the shorter one.
  const auto longer = sim.simulate(total + 1000, 1);
  for (std::size_t i = 0; i < total; ++i) ASSERT_TRUE(same(longer[i], one[i])) << i;
  EXPECT_TRUE(sim.simulate(0).empty());
  EXPECT_TRUE(sim.block(5, total).empty());
}

TEST(Simulator, SeedChangesOutput) {
  const auto a = RoundSimulator(protocol(), channel(10), {}, 1).simulate(100);
  const auto b = RoundSimulator(protocol(), channel(10), {}, 2).simulate(100);
  int differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += !same(a[i], b[i]);
  EXPECT_GT(differ, 90);
}

TEST(Simulator, ZBasisGainAndErrorMatchClosedForm) {
  const auto ch = channel(10, 1e-3);
  SimulationSettings s;
  s.intensity_probs = {1.0, 0.0, 0.0, 0.0};
  s.p_alice_z = 1.0;
  s.p_bob_key = 1.0;
  const auto recs = RoundSimulator(protocol(), ch, s, 7).simulate(1000000);
  double accepted = 0, errors = 0;
  for (const auto& r : recs) {
    ASSERT_EQ(r.phi1, r.phi2);
    const int bit = decode_key_bit(r.q1, r.q2, protocol().tau);
    if (bit < 0) continue;
    ++accepted;
    errors += bit != r.key_bit;
  }
  const double n = static_cast<double>(recs.size());
  const auto z = z_gain_and_error(0.924, ch.transmittance(), 1e-3, protocol().tau);
  const double q = accepted / n;
  const double e = errors / accepted;
  EXPECT_LT(std::abs(q - z.q_z), 4.0 * std::sqrt(z.q_z * (1 - z.q_z) / n)) << q << " vs " << z.q_z;
  EXPECT_LT(std::abs(e - z.e_z), 4.0 * std::sqrt(z.e_z * (1 - z.e_z) / accepted)) << e << " vs " << z.e_z;
}

TEST(Simulator, TagFrequenciesMatchProbabilities) {
  const auto ch = channel(5, 1e-3);
  const auto recs = RoundSimulator(protocol(), ch, {}, 8).simulate(800000);
  const auto mus = protocol().intensities();
  for (int a = 0; a < kIntensityLevels; ++a) {
    const auto p = virtual_tag_probabilities(mus[a], protocol(), ch);
    std::array<double, 6> counts{};
    double n = 0;
    for (const auto& r : recs) {
      if (r.intensity != a || r.alice_basis != AliceBasis::Z || r.bob_basis != BobBasis::Key) {
        EXPECT_TRUE(r.intensity != a || r.tag == VirtualTag::None);
        continue;
      }
      ++n;
      ++counts[static_cast<int>(r.tag)];
    }
    for (int k = 0; k < 6; ++k) {
      EXPECT_LT(std::abs(counts[k] / n - p[k]), 4.0 * std::sqrt(p[k] * (1 - p[k]) / n) + 1e-12)
          << "intensity " << a << " tag " << k;
    }
  }
}

TEST(Simulator, TomographyRoundsEstimateObservedYields) {
  const auto ch = channel(10, 1e-3, 5.0 * std::numbers::pi / 180.0);
  SimulationSettings s;
  s.intensity_probs = {1.0, 0.0, 0.0, 0.0};
  s.p_alice_z = 0.2;
  s.p_bob_key = 0.0;
  const auto recs = RoundSimulator(protocol(), ch, s, 9).simulate(1500000);
  const KernelLattice lattice(1.0, standard_kernel_specs());
  const auto model = YieldModel::from(ch);
  for (auto cfg : kAllConfigs) {
    std::vector<QuadratureRecord> q;
    for (const auto& r : recs) {
      if (r.config() == cfg) q.push_back({r.phi1, r.q1, r.phi2, r.q2});
    }
    const auto est = estimate_observables(q, lattice);
    for (std::size_t i = 0; i < kAllObservables.size(); ++i) {
      const double expected = observed_yield(cfg, protocol().mu, kAllObservables[i], model);
      EXPECT_LT(std::abs(est[i].value.real() - expected), 4.5 * est[i].std_error_real)
          << config_id(cfg) << " " << observable_id(kAllObservables[i]);
    }
  }
}

TEST(RoundIo, CsvRoundTrip) {
  const auto recs = RoundSimulator(protocol(), channel(10, 1e-3), {}, 3).simulate(500);
  std::stringstream ss;
  write_round_header_csv(ss);
  write_rounds_csv(ss, recs);
  const auto back = read_rounds_csv(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_TRUE(same(back[i], recs[i])) << i;
}

TEST(RoundIo, BinaryRoundTrip) {
  const auto recs = RoundSimulator(protocol(), channel(10, 1e-3), {}, 4).simulate(500);
  std::stringstream ss;
  write_round_header_binary(ss);
  write_rounds_binary(ss, recs);
  EXPECT_EQ(ss.str().size(), 8 + recs.size() * (6 + 32));
  const auto back = read_rounds_binary(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_TRUE(same(back[i], recs[i])) << i;
}

TEST(RoundIo, EmptyRunWritesHeaderOnly) {
  std::stringstream csv;
  write_round_header_csv(csv);
  write_rounds_csv(csv, {});
  EXPECT_EQ(csv.str(), "intensity,alice_basis,key_bit,phase_index,bob_basis,tag,phi1,q1,phi2,q2\n");
  EXPECT_TRUE(read_rounds_csv(csv).empty());
  std::stringstream bin;
  write_round_header_binary(bin);
  EXPECT_EQ(bin.str(), "TBCVRND1");
  EXPECT_TRUE(read_rounds_binary(bin).empty());
}

TEST(RoundIo, RejectsMalformedInput) {
  std::stringstream no_header("0,Z,0,0,key,0,0,0,0,0\n");
  EXPECT_THROW(read_rounds_csv(no_header), Error);
  std::stringstream bad_basis(
      "intensity,alice_basis,key_bit,phase_index,bob_basis,tag,phi1,q1,phi2,q2\n0,Y,0,0,key,0,0,0,0,0\n");
  EXPECT_THROW(read_rounds_csv(bad_basis), Error);
  std::stringstream bad_tag(
      "intensity,alice_basis,key_bit,phase_index,bob_basis,tag,phi1,q1,phi2,q2\n0,Z,0,0,key,6,0,0,0,0\n");
  EXPECT_THROW(read_rounds_csv(bad_tag), Error);
  std::stringstream bad_magic("TBCVXXXX");
  EXPECT_THROW(read_rounds_binary(bad_magic), Error);
  std::stringstream truncated(std::string("TBCVRND1") + std::string(10, '\0'));
  EXPECT_THROW(read_rounds_binary(truncated), Error);
}

TEST(RoundRecord, ConfigMapping) {
  RoundRecord r;
  EXPECT_EQ(r.config(), SourceConfig::Z);
  r.alice_basis = AliceBasis::X;
  r.phase_index = 2;
  EXPECT_EQ(r.config(), SourceConfig::Phi180);
}
