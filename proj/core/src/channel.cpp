#include "tbcv/channel.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace tbcv {

namespace {

constexpr double kUnitEtaTol = 1e-12;

double ipow(double x, int k) {
  double r = 1.0;
  const bool neg = k < 0;
  for (int i = 0; i < (neg ? -k : k); ++i) r *= x;
  return neg ? 1.0 / r : r;
}

struct ThermalWeights {
  std::vector<double> p;  // P_th(0..Nc)
};

ThermalWeights thermal_weights(const ChannelParams& ch) {
  ch.validate();
  const double kbar = ch.thermal_mean();
  ThermalWeights w;
  w.p.resize(static_cast<std::size_t>(ch.cutoff_Nc) + 1);
  for (int k = 0; k <= ch.cutoff_Nc; ++k) w.p[k] = thermal_photon_prob(kbar, k);
  return w;
}

double q11_term(double eta, int k, int l) {
  const double a = (k + 1) * eta - k;
  return ipow(eta, k + l - 1) * (a * a + l * (k + 1) * (1.0 - eta) * (1.0 - eta));
}

double e11_term(double eta, int k, int l) {
  return 0.25 * ipow(eta, k + l - 1) * (1.0 - eta) * (1.0 - eta) * (k * k + l * l + k + l);
}

double q22_02_half(double eta, int k, int l) {
  const double om = 1.0 - eta;
  const double a = eta * eta - 2.0 * k * eta * om + 0.5 * k * (k - 1) * om * om;
  const double b = 0.25 * l * l * (l - 1) * (l - 1) * om * om * om * om;
  return 0.5 * ipow(eta, k + l - 2) * (a * a + b);
}

double q22_11_half(double eta, int k, int l) {
  const double om = 1.0 - eta;
  const double a = std::sqrt(2.0 * (k + 1) * l) * eta * om - std::sqrt(0.5 * k * l * (k + 1)) * om * om;
  return 0.5 * ipow(eta, k + l - 2) * a * a;
}

double e22_02_term(double eta, int k, int l) {
  const double om = 1.0 - eta;
  const double a = 2.0 * (k - l) * om * eta + (k * k - k - l * l - l) * om * om;
  return 0.25 * ipow(eta, k + l - 2) * a * a;
}

double e22_11_term(double eta, int k, int l) {
  const double om = 1.0 - eta;
  const double a = eta - 0.5 * k * om;
  const double b = eta - 0.5 * l * om;
  return ipow(eta, k + l - 2) * om * om * (l * (k + 1) * a * a + k * (l + 1) * b * b);
}

}  // namespace

double ChannelParams::transmittance() const {
  return detector_efficiency * std::pow(10.0, -attenuation_db_per_km * distance_km / 10.0);
}

void ChannelParams::validate() const {
  if (!(distance_km >= 0.0)) fail(ErrorKind::Config, "distance_km must be >= 0");
  if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0)) {
    fail(ErrorKind::Config, "detector_efficiency must lie in (0,1]");
  }
  if (!(excess_noise_xi >= 0.0)) fail(ErrorKind::Config, "excess_noise_xi must be >= 0");
  if (cutoff_Nc < 0) fail(ErrorKind::Config, "cutoff_Nc must be >= 0");
  const double eta = transmittance();
  if (!(eta > 0.0 && eta <= 1.0)) fail(ErrorKind::Config, "transmittance outside (0,1]");
}

double ChannelParams::thermal_mean() const {
  if (excess_noise_xi == 0.0) return 0.0;
  const double eta = transmittance();
  if (eta >= 1.0 - kUnitEtaTol) {
    fail(ErrorKind::Config,
         "thermal decomposition undefined for unit transmittance with excess noise");
  }
  return excess_noise_xi / (2.0 * (1.0 - eta));
}

ThermalChannel compose_channels(const ThermalChannel& first, const ThermalChannel& second) {
  return {first.eta * second.eta, second.eta * first.xi + second.xi};
}

void TagStats::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(q_star_0) || !in_unit(q_z) || !in_unit(e_z)) {
    fail(ErrorKind::Domain, "TagStats entry outside [0,1]");
  }
  for (const auto& [m, q] : q_mm) {
    if (!in_unit(q)) fail(ErrorKind::Domain, "TagStats gain outside [0,1]");
  }
  for (const auto& [m, e] : e_x_mm) {
    if (!in_unit(e)) fail(ErrorKind::Domain, "TagStats phase-error rate outside [0,1]");
  }
}

ZStats z_gain_and_error(double mu, double eta, double xi, double tau) {
  if (!(mu >= 0.0)) fail(ErrorKind::Domain, "z_gain_and_error: negative intensity");
  if (!(tau > 0.0)) fail(ErrorKind::Domain, "z_gain_and_error: tau must be positive");
  const double s = std::sqrt(1.0 + xi);
  const double p_in0 = normal_cdf(tau / s) - normal_cdf(-tau / s);
  const double amp = 2.0 * std::sqrt(eta * mu);

  auto phase_average = [&](int n) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double m = amp * std::cos(2.0 * std::numbers::pi * j / n);
      acc += normal_cdf((tau - m) / s) - normal_cdf((-tau - m) / s);
    }
    return acc / n;
  };

  double p_in1 = p_in0;
  if (amp > 0.0) {
    int n = 512;
    double coarse = phase_average(n / 2);
    p_in1 = phase_average(n);
    while (std::abs(p_in1 - coarse) > 1e-13 * std::max(1.0, p_in1)) {
      if (n >= 1 << 16) fail(ErrorKind::Numeric, "z_gain_and_error: phase average not converged");
      n *= 2;
      coarse = p_in1;
      p_in1 = phase_average(n);
    }
  }
  const double p_correct = p_in0 * (1.0 - p_in1);
  const double p_err = (1.0 - p_in0) * p_in1;
  ZStats z;
  z.q_z = p_correct + p_err;
  if (amp == 0.0) {
    z.e_z = 0.5;
  } else {
    z.e_z = z.q_z > 0.0 ? p_err / z.q_z : 0.5;
  }
  return z;
}

double vacuum_receive_prob(double mu, double eta, double xi) {
  const double kappa = 2.0 / (2.0 + xi);
  return kappa * kappa * std::exp(-kappa * eta * mu);
}

double thermal_photon_prob(double kbar, int k) {
  if (kbar == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::pow(kbar, k) / std::pow(kbar + 1.0, k + 1);
}

double tagged_gain_Q11(double mu, const ChannelParams& ch, const RegionCoefficients& rc) {
  const auto w = thermal_weights(ch);
  const double eta = ch.transmittance();
  double sum = 0.0;
  for (int k = 0; k <= ch.cutoff_Nc; ++k) {
    for (int l = 0; l <= ch.cutoff_Nc; ++l) {
      if (w.p[k] * w.p[l] == 0.0) continue;
      sum += w.p[k] * w.p[l] * q11_term(eta, k, l);
    }
  }
  return rc.c1 * poisson(mu, 1) * sum;
}

double tagged_error_e11(double mu, const ChannelParams& ch, const RegionCoefficients& rc) {
  const auto w = thermal_weights(ch);
  const double eta = ch.transmittance();
  const double mis = std::sin(0.5 * ch.misalignment_delta);
  double sum = 0.0;
  for (int k = 0; k <= ch.cutoff_Nc; ++k) {
    for (int l = 0; l <= ch.cutoff_Nc; ++l) {
      if (w.p[k] * w.p[l] == 0.0) continue;
      sum += w.p[k] * w.p[l] * (rc.c1 * e11_term(eta, k, l) + rc.c1 * mis * mis);
    }
  }
  const double q11 = tagged_gain_Q11(mu, ch, rc);
  if (q11 == 0.0) fail(ErrorKind::UndefinedRate, "tagged_error_e11: Q11 = 0");
  return sum * poisson(mu, 1) / q11;
}

double tagged_gain_Q22(double mu, const ChannelParams& ch, const RegionCoefficients& rc) {
  const auto w = thermal_weights(ch);
  const double eta = ch.transmittance();
  double sum = 0.0;
  for (int k = 0; k <= ch.cutoff_Nc; ++k) {
    for (int l = 0; l <= ch.cutoff_Nc; ++l) {
      if (w.p[k] * w.p[l] == 0.0) continue;
      const double t02 = q22_02_half(eta, k, l) + q22_02_half(eta, l, k);
      const double t11 = q22_11_half(eta, k, l) + q22_11_half(eta, l, k);
      sum += w.p[k] * w.p[l] * (rc.c2_02 * t02 + rc.c2_11 * t11);
    }
  }
  return poisson(mu, 2) * sum;
}

double tagged_error_e22(double mu, const ChannelParams& ch, const RegionCoefficients& rc) {
  const auto w = thermal_weights(ch);
  const double eta = ch.transmittance();
  const double mis = std::sin(ch.misalignment_delta);
  double sum = 0.0;
  for (int k = 0; k <= ch.cutoff_Nc; ++k) {
    for (int l = 0; l <= ch.cutoff_Nc; ++l) {
      if (w.p[k] * w.p[l] == 0.0) continue;
      sum += w.p[k] * w.p[l] *
             (rc.c2_02 * e22_02_term(eta, k, l) + rc.c2_02 * mis * mis +
              rc.c2_11 * e22_11_term(eta, k, l));
    }
  }
  const double q22 = tagged_gain_Q22(mu, ch, rc);
  if (q22 == 0.0) fail(ErrorKind::UndefinedRate, "tagged_error_e22: Q22 = 0");
  return sum * poisson(mu, 2) / q22;
}

double tagged_gain_ideal(int m, double mu, double eta, double tau) {
  if (m < 1) fail(ErrorKind::Domain, "tagged_gain_ideal: m must be >= 1");
  return region_coefficient_m(m, tau) * poisson(mu, m) * ipow(eta, m);
}

double tagged_error_ideal(int m, double mu, double eta, double delta, double tau) {
  if (m < 1) fail(ErrorKind::Domain, "tagged_error_ideal: m must be >= 1");
  const double cm = region_coefficient_m(m, tau);
  const double q = cm * poisson(mu, m) * ipow(eta, m);
  if (q == 0.0) fail(ErrorKind::UndefinedRate, "tagged_error_ideal: zero gain");
  const double s = std::sin(0.5 * m * delta);
  return cm * s * s * poisson(mu, m) / q;
}

std::complex<double> coherent_output_fock_element(std::complex<double> alpha, double xi, int m,
                                                  int n, FockElementForm form) {
  if (m > n) return std::conj(coherent_output_fock_element(alpha, xi, n, m, form));
  const double kappa = 2.0 / (2.0 + xi);
  const double a2 = std::norm(alpha);
  const double e = std::exp(-kappa * a2);
  const bool printed = form == FockElementForm::Printed;
  if (m == 0 && n == 0) return kappa * e;
  if (m == 1 && n == 1) return kappa * (kappa * kappa * a2 + 1.0 - kappa) * e;
  if (m == 0 && n == 1) return (printed ? -1.0 : 1.0) * kappa * kappa * std::conj(alpha) * e;
  if (m == 2 && n == 2) {
    const double k2 = kappa * kappa;
    const double c0 = printed ? 1.0 - k2 : (1.0 - kappa) * (1.0 - kappa);
    return kappa * (0.5 * k2 * k2 * a2 * a2 + 2.0 * (k2 - k2 * kappa) * a2 + c0) * e;
  }
  if (m == 0 && n == 2) {
    const auto ac = std::conj(alpha);
    return kappa * kappa * kappa * ac * ac / std::numbers::sqrt2 * e;
  }
  fail(ErrorKind::Unsupported, "coherent_output_fock_element: unsupported element <" +
                                   std::to_string(m) + "|rho|" + std::to_string(n) + ">");
}

}  // namespace tbcv
