#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tbcv/error.hpp"

namespace tbcv {

inline constexpr int kMaxPolyOrder = 24;

/// Physicists' Hermite polynomial H_n(x).
double hermite(int n, double x, int max_order = kMaxPolyOrder);

/// Generalized Laguerre polynomial L_n^d(x).
double generalized_laguerre(int n, int d, double x, int max_order = kMaxPolyOrder);

/// e^{-mu} mu^m / m!, evaluated in log space.
double poisson(double mu, int m);

/// h(p) in bits with h(0) = h(1) = 0.
double binary_entropy(double p);

double normal_cdf(double x);

/// psi_n(q) = H_n(q/sqrt2) e^{-q^2/4} / sqrt(2^n n! sqrt(2 pi)); vacuum variance 1.
double fock_wavefunction(int n, double q);

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point rule from Newton iteration on the Legendre recurrence.
GaussLegendreRule gauss_legendre_rule(int n);

/// Shared 20-point rule used by the adaptive integrator.
const GaussLegendreRule& default_rule();

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_depth = 40;
};

namespace detail {

template <class F>
double gl_panel(const F& f, double a, double b, const GaussLegendreRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return s * half;
}

template <class F>
double gl_adapt(const F& f, double a, double b, double whole, const QuadratureOptions& opt,
                const GaussLegendreRule& rule, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl_panel(f, a, mid, rule);
  const double right = gl_panel(f, mid, b, rule);
  const double refined = left + right;
  const double err = std::abs(refined - whole);
  if (err <= opt.abs_tol || err <= opt.rel_tol * std::abs(refined)) return refined;
  if (depth >= opt.max_depth) {
    fail(ErrorKind::Numeric, "adaptive Gauss-Legendre: panel depth exhausted");
  }
  QuadratureOptions half = opt;
  half.abs_tol = 0.5 * opt.abs_tol;
  return gl_adapt(f, a, mid, left, half, rule, depth + 1) +
         gl_adapt(f, mid, b, right, half, rule, depth + 1);
}

}  // namespace detail

/// Adaptive bisection over 20-point Gauss-Legendre panels.
template <class F>
double integrate(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (a == b) return 0.0;
  const auto& rule = default_rule();
  return detail::gl_adapt(f, a, b, detail::gl_panel(f, a, b, rule), opt, rule, 0);
}

/// Integral of psi_n^2 over |q| < tau.
double band_probability(int n, double tau);

/// Integral of psi_n^2 over |q| > tau, integrated directly on [tau, tau + 12].
double tail_probability(int n, double tau);

enum class VacuumFactor {
  Consistent,     // two-mode vacuum accepted under the key map
  PrintedIntegrand,  // printed integrand with psi_1^2 on the second mode
};

struct RegionCoefficients {
  double tau = 0.0;
  double c1 = 0.0;
  double c2_02 = 0.0;
  double c2_11 = 0.0;
  double vac_accept = 0.0;
};

RegionCoefficients region_coefficients(double tau,
                                       VacuumFactor vacuum = VacuumFactor::Consistent);

/// Acceptance of {|0m>, |m0>} under the key map; c_pair(0, m).
double region_coefficient_m(int m, double tau);

}  // namespace tbcv
