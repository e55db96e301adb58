#include "tbcv/yields.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace tbcv {

namespace {

using cplx = std::complex<double>;

// Polynomial in t = sqrt(mu) with complex coefficients.
struct Poly {
  std::vector<cplx> c;

  static Poly constant(cplx v) { return Poly{{v}}; }
  static Poly monomial(cplx v, int power) {
    Poly p;
    p.c.assign(static_cast<std::size_t>(power) + 1, 0.0);
    p.c[power] = v;
    return p;
  }
  Poly& operator+=(const Poly& o) {
    if (o.c.size() > c.size()) c.resize(o.c.size(), 0.0);
    for (std::size_t i = 0; i < o.c.size(); ++i) c[i] += o.c[i];
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.c.empty() || b.c.empty()) return {};
    Poly r;
    r.c.assign(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) {
      for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    }
    return r;
  }
  friend Poly operator*(cplx s, Poly a) {
    for (auto& v : a.c) v *= s;
    return a;
  }
  Poly conj() const {
    Poly r = *this;
    for (auto& v : r.c) v = std::conj(v);
    return r;
  }
};

// <m|rho|n> / exp(-kappa |alpha|^2) for alpha = s t.
Poly element_poly(cplx s, double xi, int m, int n, FockElementForm form) {
  if (m > n) return element_poly(s, xi, n, m, form).conj();
  const double k = 2.0 / (2.0 + xi);
  const double s2 = std::norm(s);
  const bool printed = form == FockElementForm::Printed;
  if (m == 0 && n == 0) return Poly::constant(k);
  if (m == 1 && n == 1) return Poly::constant(k * (1.0 - k)) + Poly::monomial(k * k * k * s2, 2);
  if (m == 0 && n == 1) return Poly::monomial((printed ? -1.0 : 1.0) * k * k * std::conj(s), 1);
  if (m == 2 && n == 2) {
    const double c0 = printed ? 1.0 - k * k : (1.0 - k) * (1.0 - k);
    return Poly::constant(k * c0) + Poly::monomial(2.0 * k * (k * k - k * k * k) * s2, 2) +
           Poly::monomial(0.5 * k * k * k * k * k * s2 * s2, 4);
  }
  if (m == 0 && n == 2) {
    const cplx sc = std::conj(s);
    return Poly::monomial(k * k * k * sc * sc / std::numbers::sqrt2, 2);
  }
  fail(ErrorKind::Unsupported, "element_poly: unsupported Fock element");
}

template <class Elem>
auto expectation(const Elem& ea, const Elem& eb, Observable obs) {
  auto diag = [&](int i, int j) { return ea(i, i) * eb(j, j); };
  auto cat = [&](int m, double sign) {
    auto d = ea(0, 0) * eb(m, m) + ea(m, m) * eb(0, 0);
    auto x = ea(0, m) * eb(m, 0);
    auto xc = ea(m, 0) * eb(0, m);
    return 0.5 * (d + sign * (x + xc));
  };
  switch (obs) {
    case Observable::P00: return diag(0, 0);
    case Observable::P01: return diag(0, 1);
    case Observable::P10: return diag(1, 0);
    case Observable::P11: return diag(1, 1);
    case Observable::P02: return diag(0, 2);
    case Observable::P20: return diag(2, 0);
    case Observable::Psi1Plus: return cat(1, +1.0);
    case Observable::Psi1Minus: return cat(1, -1.0);
    case Observable::Psi2Plus: return cat(2, +1.0);
    case Observable::Psi2Minus: return cat(2, -1.0);
  }
  fail(ErrorKind::Unsupported, "unsupported observable");
}

struct PolyElem {
  cplx s;
  double xi;
  FockElementForm form;
  Poly operator()(int m, int n) const { return element_poly(s, xi, m, n, form); }
};

struct ValueElem {
  cplx a;
  double xi;
  FockElementForm form;
  cplx operator()(int m, int n) const { return coherent_output_fock_element(a, xi, m, n, form); }
};

Poly operator*(double s, const Poly& p) { return cplx(s, 0.0) * p; }

// Mode amplitudes per unit sqrt(mu) for each half of the source mixture.
struct ModePair {
  cplx a;
  cplx b;
};

std::vector<ModePair> source_modes(SourceConfig cfg, const YieldModel& model) {
  const double r = std::sqrt(model.eta);
  if (cfg == SourceConfig::Z) return {{0.0, r}, {r, 0.0}};
  const double h = std::sqrt(model.eta / 2.0);
  return {{h, std::polar(h, config_phase(cfg) + model.delta)}};
}

}  // namespace

std::string_view observable_id(Observable obs) {
  switch (obs) {
    case Observable::P00: return "00";
    case Observable::P01: return "01";
    case Observable::P10: return "10";
    case Observable::P11: return "11";
    case Observable::P02: return "02";
    case Observable::P20: return "20";
    case Observable::Psi1Plus: return "psi1+";
    case Observable::Psi1Minus: return "psi1-";
    case Observable::Psi2Plus: return "psi2+";
    case Observable::Psi2Minus: return "psi2-";
  }
  return "?";
}

Observable parse_observable(std::string_view id) {
  for (auto obs : kAllObservables) {
    if (observable_id(obs) == id) return obs;
  }
  fail(ErrorKind::Unsupported, "unknown observable id '" + std::string(id) + "'");
}

std::string_view config_id(SourceConfig cfg) {
  switch (cfg) {
    case SourceConfig::Z: return "Z";
    case SourceConfig::Phi0: return "phi0";
    case SourceConfig::Phi90: return "phi90";
    case SourceConfig::Phi180: return "phi180";
    case SourceConfig::Phi270: return "phi270";
  }
  return "?";
}

SourceConfig parse_config(std::string_view id) {
  for (auto cfg : kAllConfigs) {
    if (config_id(cfg) == id) return cfg;
  }
  fail(ErrorKind::Unsupported, "unknown source config '" + std::string(id) + "'");
}

double config_phase(SourceConfig cfg) {
  switch (cfg) {
    case SourceConfig::Z: return 0.0;
    case SourceConfig::Phi0: return 0.0;
    case SourceConfig::Phi90: return 0.5 * std::numbers::pi;
    case SourceConfig::Phi180: return std::numbers::pi;
    case SourceConfig::Phi270: return 1.5 * std::numbers::pi;
  }
  return 0.0;
}

YieldModel YieldModel::from(const ChannelParams& ch) {
  ch.validate();
  YieldModel m;
  m.eta = ch.transmittance();
  m.xi = ch.excess_noise_xi;
  m.delta = ch.misalignment_delta;
  return m;
}

double product_state_expectation(cplx a, cplx b, double xi, Observable obs,
                                 FockElementForm form) {
  return expectation(ValueElem{a, xi, form}, ValueElem{b, xi, form}, obs).real();
}

double observed_yield(SourceConfig cfg, double mu, Observable obs, const YieldModel& model) {
  if (!(mu >= 0.0)) fail(ErrorKind::Domain, "observed_yield: negative intensity");
  const double t = std::sqrt(mu);
  const auto modes = source_modes(cfg, model);
  double acc = 0.0;
  for (const auto& mp : modes) {
    acc += product_state_expectation(mp.a * t, mp.b * t, model.xi, obs, model.form);
  }
  return acc / static_cast<double>(modes.size());
}

std::vector<double> photon_yields(SourceConfig cfg, Observable obs, const YieldModel& model,
                                  int max_m) {
  if (max_m < 0) fail(ErrorKind::Domain, "photon_yields: negative max photon number");
  const auto modes = source_modes(cfg, model);
  Poly total;
  for (const auto& mp : modes) {
    total += (1.0 / static_cast<double>(modes.size())) *
             expectation(PolyElem{mp.a, model.xi, model.form},
                         PolyElem{mp.b, model.xi, model.form}, obs);
  }
  // Y(mu) = exp(-kappa eta mu) P(mu); match coefficients of e^{mu} Y(mu) = sum_m y_m mu^m / m!.
  std::vector<double> p_coef;
  for (std::size_t i = 0; i < total.c.size(); i += 2) p_coef.push_back(total.c[i].real());
  const double kappa = 2.0 / (2.0 + model.xi);
  const double rate = 1.0 - kappa * model.eta;
  std::vector<double> y(static_cast<std::size_t>(max_m) + 1, 0.0);
  for (int m = 0; m <= max_m; ++m) {
    double coef = 0.0;
    for (int p = 0; p <= m && p < static_cast<int>(p_coef.size()); ++p) {
      const int j = m - p;
      coef += p_coef[p] * std::pow(rate, j) / std::tgamma(j + 1.0);
    }
    y[m] = coef * std::tgamma(m + 1.0);
  }
  return y;
}

}  // namespace tbcv
