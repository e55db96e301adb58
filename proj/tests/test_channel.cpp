#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "tbcv/channel.hpp"

using namespace tbcv;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

double degrees(double d) { return d * kPi / 180.0; }

ChannelParams channel_at(double km, double xi, double delta = 0.0, int nc = 3) {
  ChannelParams ch;
  ch.distance_km = km;
  ch.excess_noise_xi = xi;
  ch.misalignment_delta = delta;
  ch.cutoff_Nc = nc;
  return ch;
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Phase-averaged key map statistics by Gauss-Kronrod over the relative phase.
ZStats z_oracle(double mu, double eta, double xi, double tau) {
  using boost::math::quadrature::gauss_kronrod;
  const double s = std::sqrt(1.0 + xi);
  auto p_out = [&](double mean) { return phi_cdf((-tau - mean) / s) + 1.0 - phi_cdf((tau - mean) / s); };
  const double out0 = p_out(0.0);
  auto correct = [&](double th) { return p_out(2 * std::sqrt(eta * mu) * std::cos(th)) * (1 - out0); };
  auto wrong = [&](double th) { return (1 - p_out(2 * std::sqrt(eta * mu) * std::cos(th))) * out0; };
  const double c = gauss_kronrod<double, 61>::integrate(correct, 0.0, kPi, 20, 1e-14) / kPi;
  const double w = gauss_kronrod<double, 61>::integrate(wrong, 0.0, kPi, 20, 1e-14) / kPi;
  return {c + w, w / (c + w)};
}

// Printed thermal-decomposition sums, transcribed term by term.
struct PrintedSums {
  double q11 = 0, e11 = 0, q22 = 0, e22 = 0;
};

PrintedSums printed_sums(double mu, double eta, double xi, double delta, double tau, int nc) {
  const auto rc = region_coefficients(tau);
  const double kbar = xi / (2.0 * (1.0 - eta));
  auto pth = [&](int k) { return std::pow(kbar, k) / std::pow(kbar + 1.0, k + 1); };
  const double p1 = std::exp(-mu) * mu;
  const double p2 = std::exp(-mu) * mu * mu / 2.0;
  const double om = 1.0 - eta;
  PrintedSums s;
  double err11 = 0, err22 = 0;
  for (int k = 0; k <= nc; ++k) {
    for (int l = 0; l <= nc; ++l) {
      const double w = pth(k) * pth(l);
      s.q11 += w * rc.c1 * p1 * std::pow(eta, k + l - 1) *
               (std::pow((k + 1) * eta - k, 2) + l * (k + 1) * om * om);
      err11 += w * p1 *
               (rc.c1 / 4 * std::pow(eta, k + l - 1) * om * om * (k * k + l * l + k + l) +
                rc.c1 * std::pow(std::sin(delta / 2), 2));
      auto q02 = [&](int a, int b) {
        return 0.5 * rc.c2_02 * p2 * std::pow(eta, a + b - 2) *
               (std::pow(eta * eta - 2.0 * a * eta * om + 0.5 * a * (a - 1) * om * om, 2) +
                0.25 * b * b * (b - 1) * (b - 1) * std::pow(om, 4));
      };
      auto q11s = [&](int a, int b) {
        return 0.5 * rc.c2_11 * p2 * std::pow(eta, a + b - 2) *
               std::pow(std::sqrt(2.0 * (a + 1) * b) * eta * om - std::sqrt(0.5 * a * b * (a + 1)) * om * om, 2);
      };
      s.q22 += w * (q02(k, l) + q02(l, k) + q11s(k, l) + q11s(l, k));
      const double e02 = rc.c2_02 / 4 * std::pow(eta, k + l - 2) *
                         std::pow(2.0 * (k - l) * om * eta + (k * k - k - l * l - l) * om * om, 2);
      const double e11s = rc.c2_11 * std::pow(eta, k + l - 2) * om * om *
                          (l * (k + 1) * std::pow(eta - 0.5 * k * om, 2) +
                           k * (l + 1) * std::pow(eta - 0.5 * l * om, 2));
      err22 += w * p2 * (e02 + rc.c2_02 * std::pow(std::sin(delta), 2) + e11s);
    }
  }
  s.e11 = err11 / s.q11;
  s.e22 = err22 / s.q22;
  return s;
}

}  // namespace

TEST(ChannelParams, Transmittance) {
  EXPECT_NEAR(channel_at(20, 0).transmittance(), std::pow(10.0, -0.4), 1e-15);
  auto ch = channel_at(0, 0);
  ch.detector_efficiency = 0.6;
  EXPECT_DOUBLE_EQ(ch.transmittance(), 0.6);
  EXPECT_NEAR(channel_at(10, 1e-3).thermal_mean(), 1e-3 / (2 * (1 - std::pow(10.0, -0.2))), 1e-15);
}

TEST(ChannelParams, UnitTransmittanceWithNoiseIsConfigError) {
  try {
    channel_at(0, 1e-3).thermal_mean();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
  EXPECT_THROW(channel_at(-1, 0).validate(), Error);
}

TEST(ComposeChannels, Examples) {
  const auto a = compose_channels({1.0, 0.0}, {0.7, 0.03});
  EXPECT_DOUBLE_EQ(a.eta, 0.7);
  EXPECT_DOUBLE_EQ(a.xi, 0.03);
  const auto b = compose_channels({0.7, 0.03}, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(b.eta, 0.7);
  EXPECT_DOUBLE_EQ(b.xi, 0.03);
  const auto c = compose_channels({0.8, 0.01}, {0.5, 0.002});
  EXPECT_NEAR(c.eta, 0.4, 1e-15);
  EXPECT_NEAR(c.xi, 0.007, 1e-15);
}

TEST(ComposeChannels, Associative) {
  const ThermalChannel x{0.9, 0.01}, y{0.6, 0.004}, z{0.35, 0.02};
  const auto left = compose_channels(compose_channels(x, y), z);
  const auto right = compose_channels(x, compose_channels(y, z));
  EXPECT_NEAR(left.eta, right.eta, 1e-16);
  EXPECT_NEAR(left.xi, right.xi, 1e-16);
  EXPECT_NEAR(left.eta, 0.9 * 0.6 * 0.35, 1e-16);
  EXPECT_NEAR(left.xi, 0.35 * (0.6 * 0.01 + 0.004) + 0.02, 1e-16);
}

TEST(ZGain, TableValues) {
  EXPECT_NEAR(z_gain_and_error(1.487, 1.0, 0.0, 1.641).e_z, 0.1052, 0.001);
  EXPECT_NEAR(z_gain_and_error(0.356, 1.0, 0.0, 1.437).e_z, 0.3095, 0.001);
}

TEST(ZGain, MatchesIndependentPhaseAverage) {
  for (double mu : {0.05, 0.356, 0.924, 1.487, 2.4}) {
    for (double eta : {1.0, 0.63, 0.4}) {
      for (double xi : {0.0, 1e-3, 0.01}) {
        for (double tau : {0.9, 1.641, 3.0}) {
          const auto z = z_gain_and_error(mu, eta, xi, tau);
          const auto o = z_oracle(mu, eta, xi, tau);
          EXPECT_NEAR(z.q_z, o.q_z, 1e-11);
          EXPECT_NEAR(z.e_z, o.e_z, 1e-10);
          EXPECT_GE(z.e_z, 0.0);
          EXPECT_LE(z.e_z, 0.5);
        }
      }
    }
  }
}

TEST(ZGain, ZeroIntensityIsHalf) {
  for (double eta : {1.0, 0.3})
    for (double tau : {0.5, 1.641, 4.0}) EXPECT_EQ(z_gain_and_error(0.0, eta, 0.0, tau).e_z, 0.5);
}

TEST(VacuumReceive, Values) {
  EXPECT_NEAR(vacuum_receive_prob(1.2, 0.5, 0.0), std::exp(-0.6), 1e-15);
  EXPECT_DOUBLE_EQ(vacuum_receive_prob(0.0, 0.7, 0.0), 1.0);
  const double eta = std::pow(10.0, -0.4);
  const double k = 2.0 / 2.001;
  EXPECT_NEAR(vacuum_receive_prob(1.487, eta, 0.001), k * k * std::exp(-2 * eta * 1.487 / 2.001), 1e-15);
}

TEST(ThermalPhoton, Normalized) {
  double s = 0.0;
  for (int k = 0; k < 200; ++k) s += thermal_photon_prob(0.3, k);
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_EQ(thermal_photon_prob(0.0, 0), 1.0);
  EXPECT_EQ(thermal_photon_prob(0.0, 2), 0.0);
}

TEST(TaggedGains, NoiselessReduction) {
  const double tau = 1.641, mu = 1.487;
  const auto rc = region_coefficients(tau);
  for (double km : {0.0, 10.0, 25.0}) {
    const auto ch = channel_at(km, 0.0);
    const double eta = ch.transmittance();
    EXPECT_NEAR(tagged_gain_Q11(mu, ch, rc), rc.c1 * poisson(mu, 1) * eta, 1e-12);
    EXPECT_NEAR(tagged_gain_Q22(mu, ch, rc), rc.c2_02 * poisson(mu, 2) * eta * eta, 1e-12);
    EXPECT_NEAR(tagged_error_e11(mu, ch, rc), 0.0, 1e-12);
    EXPECT_NEAR(tagged_error_e22(mu, ch, rc), 0.0, 1e-12);
    EXPECT_NEAR(tagged_gain_ideal(1, mu, eta, tau), tagged_gain_Q11(mu, ch, rc), 1e-12);
    EXPECT_NEAR(tagged_gain_ideal(2, mu, eta, tau), tagged_gain_Q22(mu, ch, rc), 1e-12);
  }
  const auto ch0 = channel_at(0, 0);
  EXPECT_NEAR(tagged_gain_Q11(mu, ch0, rc), rc.c1 * std::exp(-mu) * mu, 1e-14);
  EXPECT_NEAR(tagged_gain_Q22(mu, ch0, rc), rc.c2_02 * std::exp(-mu) * mu * mu / 2, 1e-14);
}

TEST(TaggedErrors, MisalignmentAtUnitTransmittance) {
  const auto rc = region_coefficients(1.641);
  const auto ch = channel_at(0, 0.0, degrees(5));
  EXPECT_NEAR(tagged_error_e11(1.487, ch, rc), std::pow(std::sin(degrees(2.5)), 2), 1e-14);
  EXPECT_NEAR(tagged_error_e11(1.487, ch, rc), 0.0019, 5e-5);
}

TEST(TaggedErrors, MisalignmentScalesWithLossVerbatim) {
  const auto rc = region_coefficients(1.641);
  const auto ch = channel_at(10, 0.0, degrees(5));
  const double eta = ch.transmittance();
  EXPECT_NEAR(tagged_error_e11(1.0, ch, rc), std::pow(std::sin(degrees(2.5)), 2) / eta, 1e-13);
  EXPECT_NEAR(tagged_error_ideal(1, 1.0, eta, degrees(5), 1.641), std::pow(std::sin(degrees(2.5)), 2) / eta, 1e-13);
}

TEST(TaggedSums, MatchPrintedDoubleLoop) {
  for (double km : {5.0, 10.0, 20.0}) {
    for (int nc : {3, 6}) {
      const auto ch = channel_at(km, 1e-3, degrees(5), nc);
      const double tau = 2.457, mu = 0.924;
      const auto rc = region_coefficients(tau);
      const auto o = printed_sums(mu, ch.transmittance(), 1e-3, degrees(5), tau, nc);
      EXPECT_NEAR(tagged_gain_Q11(mu, ch, rc), o.q11, 1e-13 * o.q11);
      EXPECT_NEAR(tagged_error_e11(mu, ch, rc), o.e11, 1e-12 * o.e11);
      EXPECT_NEAR(tagged_gain_Q22(mu, ch, rc), o.q22, 1e-13 * o.q22);
      EXPECT_NEAR(tagged_error_e22(mu, ch, rc), o.e22, 1e-12 * o.e22);
    }
  }
}

TEST(TaggedSums, CutoffConvergence) {
  const auto rc = region_coefficients(2.457);
  const auto lo = channel_at(10, 1e-3, 0.0, 3);
  const auto hi = channel_at(10, 1e-3, 0.0, 6);
  const double a = tagged_gain_Q11(0.924, lo, rc), b = tagged_gain_Q11(0.924, hi, rc);
  EXPECT_LT(std::abs(a - b) / b, 1e-6);
  const double c = tagged_gain_Q22(0.924, lo, rc), d = tagged_gain_Q22(0.924, hi, rc);
  EXPECT_LT(std::abs(c - d) / d, 1e-6);
}

TEST(TaggedErrors, NoiseAloneCreatesPhaseErrors) {
  const auto rc = region_coefficients(1.641);
  EXPECT_GT(tagged_error_e11(1.0, channel_at(10, 1e-3), rc), 0.0);
  EXPECT_GT(tagged_error_e22(1.0, channel_at(10, 1e-3), rc), 0.0);
}

TEST(TaggedErrors, ZeroGainIsUndefined) {
  const auto rc = region_coefficients(1.641);
  try {
    tagged_error_e11(0.0, channel_at(0, 0), rc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UndefinedRate);
  }
}

TEST(FockElements, PrintedExamples) {
  const cplx alpha(0.3, -0.4);
  EXPECT_NEAR(std::abs(coherent_output_fock_element(alpha, 0.0, 0, 0) - std::exp(-std::norm(alpha))), 0.0, 1e-15);
  EXPECT_EQ(coherent_output_fock_element(0.0, 0.02, 0, 1), cplx(0.0));
  const double k = 2.0 / 2.01, a2 = 0.25;
  const double printed22 =
      k * (0.5 * std::pow(k, 4) * a2 * a2 + 2 * (k * k - k * k * k) * a2 + (1 - k * k)) * std::exp(-k * a2);
  EXPECT_NEAR(coherent_output_fock_element(0.5, 0.01, 2, 2, FockElementForm::Printed).real(), printed22, 1e-15);
  const double printed01 = -k * k * 0.5 * std::exp(-k * a2);
  EXPECT_NEAR(coherent_output_fock_element(0.5, 0.01, 0, 1, FockElementForm::Printed).real(), printed01, 1e-15);
  EXPECT_THROW(coherent_output_fock_element(0.5, 0.01, 1, 2), Error);
}

TEST(FockElements, PhysicalMatchDisplacedThermalState) {
  for (cplx alpha : {cplx(0.5, 0.0), cplx(0.3, -0.7), cplx(-1.1, 0.4)}) {
    for (double xi : {0.0, 0.01, 0.2}) {
      const auto rho = oracle::displaced_thermal(alpha, xi, 60);
      for (auto [m, n] : {std::pair{0, 0}, {1, 1}, {0, 1}, {1, 0}, {2, 2}, {0, 2}, {2, 0}}) {
        const cplx v = coherent_output_fock_element(alpha, xi, m, n);
        EXPECT_NEAR(std::abs(v - rho[m][n]), 0.0, 1e-12) << m << n << " xi=" << xi << " a=" << alpha;
      }
    }
  }
}

TEST(TagStats, RangeValidation) {
  TagStats s;
  s.q_z = 1.2;
  EXPECT_THROW(s.validate(), Error);
  s.q_z = 0.5;
  s.e_x_mm[1] = -0.1;
  EXPECT_THROW(s.validate(), Error);
  s.e_x_mm[1] = 0.1;
  EXPECT_NO_THROW(s.validate());
}
