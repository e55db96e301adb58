#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tbcv/rng.hpp"
#include "tbcv/yields.hpp"

namespace tbcv {

/// Kernel for the operator |n><n+d|; its sample mean estimates <n+d|rho|n>.
struct KernelSpec {
  int n = 0;
  int d = 0;
  double eta_det = 1.0;

  void validate() const;
};

/// Real radial part G_{n,d}(q) of the kernel:
/// sqrt(n!/(n+d)!) * 2 * int_0^K k^{d+1} e^{-a k^2} L_n^d(k^2) {cos, sin}(k q) dk with a = (2 eta - 1)/(2 eta),
/// cosine for even d, sine for odd d, and K where the integrand envelope drops below 1e-16.
/// q is the efficiency-corrected quadrature q_detected / sqrt(eta_det).
double kernel_radial(const KernelSpec& spec, double q);

/// R(q, phi) = e^{i d (phi + pi/2)} (-i)^{d mod 2} G_{n,d}(q), with q as in kernel_radial.
std::complex<double> kernel_value(const KernelSpec& spec, double q, double phi);

/// Certified max |R| over all (q, phi): grid maximum with local refinement, and an
/// integration-by-parts bound C / q^2 for |q| > 30.
double kernel_bound(const KernelSpec& spec);

/// Gaussian single-mode state with quadrature mean 2 Re(alpha e^{-i phi}) and variance 1 + xi.
struct GaussianMode {
  std::complex<double> alpha{0.0, 0.0};
  double xi = 0.0;
};

/// Mode after a detector of efficiency eta_det (a pure-loss channel).
GaussianMode detect(const GaussianMode& mode, double eta_det);

double sample_quadrature(const GaussianMode& mode, double phi, CounterRng& rng);

struct QuadratureRecord {
  double phi1 = 0.0;
  double q1 = 0.0;
  double phi2 = 0.0;
  double q2 = 0.0;
};

/// CSV `phi1,q1,phi2,q2` with header; 17 significant digits.
void write_quadrature_records(std::ostream& os, const std::vector<QuadratureRecord>& records);
std::vector<QuadratureRecord> read_quadrature_records(std::istream& is);

struct Estimate {
  std::complex<double> value{0.0, 0.0};
  double std_error_real = 0.0;
  double std_error_imag = 0.0;
};

/// Sample mean of kernel(obs1, q1) * kernel(obs2, q2) over detected records, with the delete-one
/// jackknife standard error (for a mean this is the sample standard deviation over sqrt(N)).
Estimate estimate_two_mode(const std::vector<QuadratureRecord>& records, const KernelSpec& obs1,
                           const KernelSpec& obs2);

/// Radial kernels tabulated on q in [0, q_max] at a fixed efficiency, interpolated with 4-point
/// Lagrange polynomials; parity in q supplies q < 0 and exact evaluation covers |q| > q_max.
class KernelLattice {
 public:
  static constexpr double kDefaultQMax = 20.0;
  static constexpr double kDefaultStep = 1.0 / 128.0;

  KernelLattice(double eta_det, std::vector<std::pair<int, int>> nd, double q_max = kDefaultQMax,
                double step = kDefaultStep);

  double eta_det() const { return eta_det_; }
  const std::vector<std::pair<int, int>>& specs() const { return nd_; }
  std::size_t index_of(int n, int d) const;

  /// G_{n,d} at the efficiency-corrected quadrature.
  double radial(std::size_t idx, double q) const;
  std::complex<double> value(std::size_t idx, double q, double phi) const;

  /// Binary cache: magic "TBCVKLAT", format version, eta, q_max, step, counts, (n, d) pairs, values.
  void save(std::ostream& os) const;
  static KernelLattice load(std::istream& is);

 private:
  KernelLattice() = default;

  double eta_det_ = 1.0;
  double q_max_ = kDefaultQMax;
  double step_ = kDefaultStep;
  std::size_t points_ = 0;
  std::vector<std::pair<int, int>> nd_;
  std::vector<double> values_;  // points_ per spec
};

/// Specs (n, d) needed for every Observable: (0,0), (1,0), (2,0), (0,1), (0,2).
const std::vector<std::pair<int, int>>& standard_kernel_specs();

/// Estimates of all Observables from the same records, using standard_kernel_specs.
std::array<Estimate, kAllObservables.size()> estimate_observables(
    const std::vector<QuadratureRecord>& records, const KernelLattice& lattice);

/// Per-record estimator of an observable from the standard kernels of both modes
/// (index order of standard_kernel_specs). Cat projectors use four kernel products.
double observable_sample(Observable obs, const std::array<std::complex<double>, 5>& mode1,
                         const std::array<std::complex<double>, 5>& mode2);

/// Standard kernels of one detected sample.
std::array<std::complex<double>, 5> standard_kernels(const KernelLattice& lattice, double q_detected,
                                                     double phi);

/// Max |observable_sample| over all quadratures, from per-spec kernel bounds (n, d) -> bound.
double observable_sample_bound(Observable obs, const std::array<double, 5>& spec_bounds);

/// Phase-randomized source emission in configuration cfg at intensity mu, sent through the
/// channel of model (eta, xi, delta) and a detector of efficiency eta_det; LO phases uniform on [0, pi).
/// Records hold detected quadratures. Generation is split into fixed blocks, each with its own
/// stream, so the output depends only on (seed, stream_base).
std::vector<QuadratureRecord> sample_source_records(SourceConfig cfg, double mu,
                                                    const YieldModel& model, double eta_det,
                                                    std::size_t count, std::uint64_t seed,
                                                    std::uint64_t stream_base = 0, int threads = 1);

}  // namespace tbcv
