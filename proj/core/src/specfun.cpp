#include "tbcv/specfun.hpp"

#include <numbers>
#include <string>

namespace tbcv {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::OrderOverflow: return "order-overflow";
    case ErrorKind::Config: return "config";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::UndefinedRate: return "undefined-rate";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Inconsistent: return "inconsistent-statistics";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {

void check_order(int n, int max_order, const char* what) {
  if (n < 0) fail(ErrorKind::Domain, std::string(what) + ": negative order");
  if (n > max_order) {
    fail(ErrorKind::OrderOverflow, std::string(what) + ": order " + std::to_string(n) +
                                       " exceeds " + std::to_string(max_order));
  }
}

constexpr double kTailSpan = 12.0;

}  // namespace

double hermite(int n, double x, int max_order) {
  check_order(n, max_order, "hermite");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double generalized_laguerre(int n, int d, double x, int max_order) {
  check_order(n, max_order, "generalized_laguerre");
  check_order(d, max_order, "generalized_laguerre");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + d - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + d - x) * cur - (k + d) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double poisson(double mu, int m) {
  if (!(mu >= 0.0)) fail(ErrorKind::Domain, "poisson: negative mean");
  if (m < 0) return 0.0;
  if (mu == 0.0) return m == 0 ? 1.0 : 0.0;
  return std::exp(-mu + m * std::log(mu) - std::lgamma(m + 1.0));
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Domain, "binary_entropy: p outside [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double fock_wavefunction(int n, double q) {
  check_order(n, kMaxPolyOrder, "fock_wavefunction");
  // Normalized recurrence avoids the growth of H_n and n!.
  double prev = 0.0;
  double cur = std::exp(-0.25 * q * q) / std::sqrt(std::sqrt(2.0 * std::numbers::pi));
  for (int k = 0; k < n; ++k) {
    const double next = (q * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

GaussLegendreRule gauss_legendre_rule(int n) {
  if (n < 1) fail(ErrorKind::Domain, "gauss_legendre_rule: n < 1");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

const GaussLegendreRule& default_rule() {
  static const GaussLegendreRule rule = gauss_legendre_rule(20);
  return rule;
}

double band_probability(int n, double tau) {
  if (!(tau > 0.0)) fail(ErrorKind::Domain, "band_probability: tau must be positive");
  auto dens = [n](double q) {
    const double psi = fock_wavefunction(n, q);
    return psi * psi;
  };
  return 2.0 * integrate(dens, 0.0, tau);
}

double tail_probability(int n, double tau) {
  if (!(tau > 0.0)) fail(ErrorKind::Domain, "tail_probability: tau must be positive");
  auto dens = [n](double q) {
    const double psi = fock_wavefunction(n, q);
    return psi * psi;
  };
  return 2.0 * integrate(dens, tau, tau + kTailSpan);
}

RegionCoefficients region_coefficients(double tau, VacuumFactor vacuum) {
  if (!(tau > 0.0)) fail(ErrorKind::Domain, "region_coefficients: tau must be positive");
  double in[3];
  double out[3];
  for (int n = 0; n < 3; ++n) {
    in[n] = band_probability(n, tau);
    out[n] = tail_probability(n, tau);
  }
  RegionCoefficients rc;
  rc.tau = tau;
  rc.c1 = in[0] * out[1] + in[1] * out[0];
  rc.c2_02 = in[0] * out[2] + in[2] * out[0];
  rc.c2_11 = 2.0 * in[1] * out[1];
  rc.vac_accept = vacuum == VacuumFactor::Consistent ? 2.0 * in[0] * out[0]
                                                     : 2.0 * in[0] * out[1];
  return rc;
}

double region_coefficient_m(int m, double tau) {
  if (m < 0) fail(ErrorKind::Domain, "region_coefficient_m: negative photon number");
  const double in0 = band_probability(0, tau);
  const double out0 = tail_probability(0, tau);
  const double inm = band_probability(m, tau);
  const double outm = tail_probability(m, tau);
  return in0 * outm + inm * out0;
}

}  // namespace tbcv
