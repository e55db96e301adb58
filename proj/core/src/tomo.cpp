#include "tbcv/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "tbcv/parallel.hpp"
#include "tbcv/specfun.hpp"

namespace tbcv {

namespace {

constexpr double kEnvelopeCutoff = 1e-16;
constexpr double kTailStart = 30.0;
constexpr std::size_t kSampleBlock = std::size_t{1} << 16;

double damping(const KernelSpec& s) { return (2.0 * s.eta_det - 1.0) / (2.0 * s.eta_det); }

double prefactor(const KernelSpec& s) {
  return std::exp(0.5 * (std::lgamma(s.n + 1.0) - std::lgamma(s.n + s.d + 1.0)));
}

// k^{d+1} e^{-a k^2} L_n^d(k^2): the radial integrand without the oscillating factor.
double envelope(const KernelSpec& s, double a, double k) {
  return std::pow(k, s.d + 1) * std::exp(-a * k * k) * generalized_laguerre(s.n, s.d, k * k);
}

// Smallest K on a 0.25 grid beyond which a dominating polynomial times e^{-a k^2} stays below 1e-16.
double truncation_point(const KernelSpec& s, double a) {
  const double coeff = std::exp(std::lgamma(s.n + s.d + 1.0) - std::lgamma(s.d + 1.0));
  const double power = 2.0 * s.n + s.d + 1.0;
  double k = 1.0;
  while (coeff * std::pow(1.0 + k * k, 0.5 * power) * std::exp(-a * k * k) > kEnvelopeCutoff) k += 0.25;
  return k;
}

// Integral of env(k) * trig(k q) over [0, K] on panels no wider than one period.
template <class Env>
double oscillatory_integral(const Env& env, bool odd, double q, double K) {
  const double period = 2.0 * std::numbers::pi / std::max(std::abs(q), 1e-300);
  const double width = std::min(2.0, period);
  const auto panels = static_cast<int>(std::ceil(K / width));
  const double h = K / panels;
  const auto& rule = default_rule();

  double scale = 0.0;
  for (int p = 0; p < panels; ++p) {
    scale += detail::gl_panel([&](double k) { return std::abs(env(k)); }, p * h, (p + 1) * h, rule);
  }
  QuadratureOptions opt;
  opt.abs_tol = 1e-14 * std::max(scale, 1e-300);
  opt.rel_tol = 0.0;
  auto f = [&](double k) { return env(k) * (odd ? std::sin(k * q) : std::cos(k * q)); };
  double total = 0.0;
  for (int p = 0; p < panels; ++p) total += integrate(f, p * h, (p + 1) * h, opt);
  return total;
}

std::complex<double> phase_factor(int d, double phi) {
  // e^{i d (phi + pi/2)} (-i)^{d mod 2}
  std::complex<double> f = std::polar(1.0, d * (phi + 0.5 * std::numbers::pi));
  if (d % 2 == 1) f *= std::complex<double>(0.0, -1.0);
  return f;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_records(const std::vector<QuadratureRecord>& records) {
  if (records.empty()) fail(ErrorKind::Domain, "estimator requires at least one record");
}

// Running mean and variance (Welford).
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double dlt = x - mean;
    mean += dlt / n;
    m2 += dlt * (x - mean);
  }
  double std_error() const { return n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
};

}  // namespace

void KernelSpec::validate() const {
  if (n < 0 || d < 0) fail(ErrorKind::Domain, "kernel: negative photon index");
  if (n + d > kMaxPolyOrder) fail(ErrorKind::OrderOverflow, "kernel: order exceeds the polynomial cap");
  if (!(eta_det > 0.5 && eta_det <= 1.0)) {
    fail(ErrorKind::Domain, "kernel: unbounded for detector efficiency <= 1/2 (need 0.5 < eta <= 1)");
  }
}

double kernel_radial(const KernelSpec& spec, double q) {
  spec.validate();
  const double a = damping(spec);
  const double K = truncation_point(spec, a);
  const auto env = [&](double k) { return envelope(spec, a, k); };
  return prefactor(spec) * 2.0 * oscillatory_integral(env, spec.d % 2 == 1, q, K);
}

std::complex<double> kernel_value(const KernelSpec& spec, double q, double phi) {
  return phase_factor(spec.d, phi) * kernel_radial(spec, q);
}

double kernel_bound(const KernelSpec& spec) {
  spec.validate();
  // |R| does not depend on phi, and |G| is even in q.
  auto g = [&](double q) { return std::abs(kernel_radial(spec, q)); };
  constexpr double step = 0.025;
  const auto points = static_cast<int>(std::lround(kTailStart / step));
  std::vector<double> vals(points + 1);
  for (int i = 0; i <= points; ++i) vals[i] = g(i * step);

  std::vector<int> peaks;
  for (int i = 0; i <= points; ++i) {
    const double left = i > 0 ? vals[i - 1] : vals[std::min(1, points)];
    const double right = i < points ? vals[i + 1] : -1.0;
    if (vals[i] >= left && vals[i] >= right) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int x, int y) { return vals[x] > vals[y]; });
  if (peaks.size() > 5) peaks.resize(5);

  double best = *std::max_element(vals.begin(), vals.end());
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i : peaks) {
    double lo = std::max(0.0, (i - 1) * step);
    double hi = std::min(kTailStart, (i + 1) * step);
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = g(x1);
    double f2 = g(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = g(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = g(x1);
      }
    }
    best = std::max({best, f1, f2});
  }

  // Two integrations by parts: |G(q)| <= pref * (2|f'(0)| + 2 int |f''|) / q^2.
  const double a = damping(spec);
  const double K = truncation_point(spec, a);
  const double h = 1e-3;
  auto f2abs = [&](double k) {
    const double kc = std::max(k, h);
    return std::abs(envelope(spec, a, kc + h) - 2.0 * envelope(spec, a, kc) +
                    envelope(spec, a, kc - h)) /
           (h * h);
  };
  QuadratureOptions opt;
  opt.rel_tol = 1e-6;
  opt.abs_tol = 1e-6 * prefactor(spec);
  double curvature = 0.0;
  for (double k0 = 0.0; k0 < K; k0 += 1.0) curvature += integrate(f2abs, k0, std::min(K, k0 + 1.0), opt);
  const double slope0 =
      spec.d == 0 ? std::exp(std::lgamma(spec.n + spec.d + 1.0) - std::lgamma(spec.n + 1.0) -
                             std::lgamma(spec.d + 1.0))
                  : 0.0;
  // 1% headroom for the finite-difference curvature.
  const double tail =
      1.01 * prefactor(spec) * (2.0 * slope0 + 2.0 * curvature) / (kTailStart * kTailStart);

  // Relative margin covering the refinement's residual and quadrature error.
  return std::max(best, tail) * (1.0 + 1e-9) + 1e-12;
}

GaussianMode detect(const GaussianMode& mode, double eta_det) {
  if (!(eta_det > 0.0 && eta_det <= 1.0)) fail(ErrorKind::Domain, "detect: efficiency outside (0, 1]");
  return {std::sqrt(eta_det) * mode.alpha, eta_det * mode.xi};
}

double sample_quadrature(const GaussianMode& mode, double phi, CounterRng& rng) {
  if (!(mode.xi >= 0.0)) fail(ErrorKind::Domain, "sample_quadrature: negative added noise");
  const double mean = 2.0 * std::real(mode.alpha * std::polar(1.0, -phi));
  std::normal_distribution<double> dist(mean, std::sqrt(1.0 + mode.xi));
  return dist(rng);
}

void write_quadrature_records(std::ostream& os, const std::vector<QuadratureRecord>& records) {
  os << "phi1,q1,phi2,q2\n";
  for (const auto& r : records) {
    os << fmt17(r.phi1) << ',' << fmt17(r.q1) << ',' << fmt17(r.phi2) << ',' << fmt17(r.q2) << '\n';
  }
}

std::vector<QuadratureRecord> read_quadrature_records(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "phi1,q1,phi2,q2") {
    fail(ErrorKind::Io, "quadrature records: missing header 'phi1,q1,phi2,q2'");
  }
  std::vector<QuadratureRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        v.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(ErrorKind::Io, "quadrature records line " + std::to_string(lineno) + ": bad number");
      }
    }
    if (v.size() != 4) {
      fail(ErrorKind::Io, "quadrature records line " + std::to_string(lineno) + ": expected 4 fields");
    }
    const QuadratureRecord r{v[0], v[1], v[2], v[3]};
    if (!(r.phi1 >= 0.0 && r.phi1 < std::numbers::pi && r.phi2 >= 0.0 && r.phi2 < std::numbers::pi)) {
      fail(ErrorKind::Io, "quadrature records line " + std::to_string(lineno) + ": phase outside [0, pi)");
    }
    out.push_back(r);
  }
  return out;
}

Estimate estimate_two_mode(const std::vector<QuadratureRecord>& records, const KernelSpec& obs1,
                           const KernelSpec& obs2) {
  require_records(records);
  obs1.validate();
  obs2.validate();
  const double s1 = 1.0 / std::sqrt(obs1.eta_det);
  const double s2 = 1.0 / std::sqrt(obs2.eta_det);
  Moments re;
  Moments im;
  for (const auto& r : records) {
    const auto v = kernel_value(obs1, r.q1 * s1, r.phi1) * kernel_value(obs2, r.q2 * s2, r.phi2);
    re.add(v.real());
    im.add(v.imag());
  }
  return {{re.mean, im.mean}, re.std_error(), im.std_error()};
}

const std::vector<std::pair<int, int>>& standard_kernel_specs() {
  static const std::vector<std::pair<int, int>> specs = {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}};
  return specs;
}

double observable_sample(Observable obs, const std::array<std::complex<double>, 5>& m1,
                         const std::array<std::complex<double>, 5>& m2) {
  // m[0..2] = diagonal kernels for |0>, |1>, |2>; m[3] estimates <1|rho|0>, m[4] estimates <2|rho|0>.
  auto diag = [](const std::array<std::complex<double>, 5>& m, int k) { return m[k].real(); };
  auto cat = [&](int m, double sign) {
    const double off = std::real(std::conj(m1[m + 2]) * m2[m + 2]);
    return 0.5 * (diag(m1, 0) * diag(m2, m) + diag(m1, m) * diag(m2, 0) + 2.0 * sign * off);
  };
  switch (obs) {
    case Observable::P00: return diag(m1, 0) * diag(m2, 0);
    case Observable::P01: return diag(m1, 0) * diag(m2, 1);
    case Observable::P10: return diag(m1, 1) * diag(m2, 0);
    case Observable::P11: return diag(m1, 1) * diag(m2, 1);
    case Observable::P02: return diag(m1, 0) * diag(m2, 2);
    case Observable::P20: return diag(m1, 2) * diag(m2, 0);
    case Observable::Psi1Plus: return cat(1, +1.0);
    case Observable::Psi1Minus: return cat(1, -1.0);
    case Observable::Psi2Plus: return cat(2, +1.0);
    case Observable::Psi2Minus: return cat(2, -1.0);
  }
  fail(ErrorKind::Domain, "observable_sample: unknown observable");
}

double observable_sample_bound(Observable obs, const std::array<double, 5>& b) {
  switch (obs) {
    case Observable::P00: return b[0] * b[0];
    case Observable::P01:
    case Observable::P10: return b[0] * b[1];
    case Observable::P11: return b[1] * b[1];
    case Observable::P02:
    case Observable::P20: return b[0] * b[2];
    case Observable::Psi1Plus:
    case Observable::Psi1Minus: return b[0] * b[1] + b[3] * b[3];
    case Observable::Psi2Plus:
    case Observable::Psi2Minus: return b[0] * b[2] + b[4] * b[4];
  }
  fail(ErrorKind::Domain, "observable_sample_bound: unknown observable");
}

std::array<std::complex<double>, 5> standard_kernels(const KernelLattice& lattice, double q_detected,
                                                     double phi) {
  const double q = q_detected / std::sqrt(lattice.eta_det());
  std::array<std::complex<double>, 5> out;
  const auto& specs = standard_kernel_specs();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    out[i] = lattice.value(lattice.index_of(specs[i].first, specs[i].second), q, phi);
  }
  return out;
}

std::array<Estimate, kAllObservables.size()> estimate_observables(
    const std::vector<QuadratureRecord>& records, const KernelLattice& lattice) {
  require_records(records);
  std::array<Moments, kAllObservables.size()> acc;
  for (const auto& r : records) {
    const auto k1 = standard_kernels(lattice, r.q1, r.phi1);
    const auto k2 = standard_kernels(lattice, r.q2, r.phi2);
    for (std::size_t i = 0; i < kAllObservables.size(); ++i) {
      acc[i].add(observable_sample(kAllObservables[i], k1, k2));
    }
  }
  std::array<Estimate, kAllObservables.size()> out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].value = {acc[i].mean, 0.0};
    out[i].std_error_real = acc[i].std_error();
  }
  return out;
}

std::vector<QuadratureRecord> sample_source_records(SourceConfig cfg, double mu,
                                                    const YieldModel& model, double eta_det,
                                                    std::size_t count, std::uint64_t seed,
                                                    std::uint64_t stream_base, int threads) {
  if (!(mu >= 0.0)) fail(ErrorKind::Domain, "sample_source_records: negative intensity");
  if (!(model.eta >= 0.0 && model.eta <= 1.0) || !(model.xi >= 0.0)) {
    fail(ErrorKind::Domain, "sample_source_records: invalid channel model");
  }
  if (!(eta_det > 0.0 && eta_det <= 1.0)) fail(ErrorKind::Domain, "sample_source_records: bad eta_det");
  std::vector<QuadratureRecord> out(count);
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  const double two_pi = 2.0 * std::numbers::pi;
  run_blocks(blocks, threads, [&](std::size_t b) {
    CounterRng rng(seed, stream_base + b);
    std::normal_distribution<double> normal;
    const std::size_t end = std::min(count, (b + 1) * kSampleBlock);
    for (std::size_t i = b * kSampleBlock; i < end; ++i) {
      const double theta = two_pi * rng.uniform();
      std::complex<double> a1;
      std::complex<double> a2;
      if (cfg == SourceConfig::Z) {
        const auto bright = std::polar(std::sqrt(model.eta * mu), theta);
        if (rng.uniform() < 0.5) {
          a1 = bright;
        } else {
          a2 = bright;
        }
      } else {
        const double amp = std::sqrt(0.5 * model.eta * mu);
        a1 = std::polar(amp, theta);
        a2 = std::polar(amp, theta + config_phase(cfg) + model.delta);
      }
      const auto d1 = detect({a1, model.xi}, eta_det);
      const auto d2 = detect({a2, model.xi}, eta_det);
      auto& r = out[i];
      r.phi1 = std::numbers::pi * rng.uniform();
      r.phi2 = std::numbers::pi * rng.uniform();
      r.q1 = 2.0 * std::real(d1.alpha * std::polar(1.0, -r.phi1)) + std::sqrt(1.0 + d1.xi) * normal(rng);
      r.q2 = 2.0 * std::real(d2.alpha * std::polar(1.0, -r.phi2)) + std::sqrt(1.0 + d2.xi) * normal(rng);
    }
  });
  return out;
}

}  // namespace tbcv
