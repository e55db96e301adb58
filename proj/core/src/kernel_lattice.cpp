#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include "tbcv/tomo.hpp"

namespace tbcv {

namespace {

constexpr char kMagic[8] = {'T', 'B', 'C', 'V', 'K', 'L', 'A', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) fail(ErrorKind::Io, "kernel lattice cache: truncated file");
  return v;
}

}  // namespace

KernelLattice::KernelLattice(double eta_det, std::vector<std::pair<int, int>> nd, double q_max,
                             double step)
    : eta_det_(eta_det), q_max_(q_max), step_(step), nd_(std::move(nd)) {
  if (!(q_max > 0.0) || !(step > 0.0) || step * 4.0 > q_max) {
    fail(ErrorKind::Config, "kernel lattice: need q_max > 0 and at least four points");
  }
  if (nd_.empty()) fail(ErrorKind::Config, "kernel lattice: no kernel specs");
  for (const auto& [n, d] : nd_) KernelSpec{n, d, eta_det}.validate();
  points_ = static_cast<std::size_t>(std::floor(q_max / step + 1e-9)) + 1;
  values_.resize(points_ * nd_.size());
  for (std::size_t s = 0; s < nd_.size(); ++s) {
    const KernelSpec spec{nd_[s].first, nd_[s].second, eta_det};
    for (std::size_t i = 0; i < points_; ++i) {
      values_[i * nd_.size() + s] = kernel_radial(spec, static_cast<double>(i) * step);
    }
  }
}

std::size_t KernelLattice::index_of(int n, int d) const {
  for (std::size_t i = 0; i < nd_.size(); ++i) {
    if (nd_[i].first == n && nd_[i].second == d) return i;
  }
  fail(ErrorKind::Config, "kernel lattice lacks spec (" + std::to_string(n) + "," +
                              std::to_string(d) + ")");
}

double KernelLattice::radial(std::size_t idx, double q) const {
  const int d = nd_[idx].second;
  const double parity = (d % 2 == 1 && q < 0.0) ? -1.0 : 1.0;
  const double x = std::abs(q) / step_;
  const auto i = static_cast<std::size_t>(x);
  if (i + 2 >= points_) return kernel_radial({nd_[idx].first, d, eta_det_}, q);
  const double t = x - static_cast<double>(i);
  const std::size_t stride = nd_.size();
  auto at = [&](std::size_t k) { return values_[k * stride + idx]; };
  // Node -1 reflects through q = 0 using the parity of G.
  const double vm1 = i == 0 ? (d % 2 == 1 ? -at(1) : at(1)) : at(i - 1);
  const double w_m1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w_0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w_1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w_2 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return parity * (w_m1 * vm1 + w_0 * at(i) + w_1 * at(i + 1) + w_2 * at(i + 2));
}

std::complex<double> KernelLattice::value(std::size_t idx, double q, double phi) const {
  const int d = nd_[idx].second;
  std::complex<double> f = std::polar(1.0, d * (phi + 0.5 * std::numbers::pi));
  if (d % 2 == 1) f *= std::complex<double>(0.0, -1.0);
  return f * radial(idx, q);
}

void KernelLattice::save(std::ostream& os) const {
  os.write(kMagic, sizeof kMagic);
  put(os, kFormatVersion);
  put(os, eta_det_);
  put(os, q_max_);
  put(os, step_);
  put(os, static_cast<std::uint64_t>(points_));
  put(os, static_cast<std::uint64_t>(nd_.size()));
  for (const auto& [n, d] : nd_) {
    put(os, static_cast<std::int32_t>(n));
    put(os, static_cast<std::int32_t>(d));
  }
  os.write(reinterpret_cast<const char*>(values_.data()),
           static_cast<std::streamsize>(values_.size() * sizeof(double)));
  if (!os) fail(ErrorKind::Io, "kernel lattice cache: write failed");
}

KernelLattice KernelLattice::load(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    fail(ErrorKind::Io, "kernel lattice cache: bad magic");
  }
  if (get<std::uint32_t>(is) != kFormatVersion) fail(ErrorKind::Io, "kernel lattice cache: unsupported version");
  KernelLattice k;
  k.eta_det_ = get<double>(is);
  k.q_max_ = get<double>(is);
  k.step_ = get<double>(is);
  k.points_ = get<std::uint64_t>(is);
  const auto nspec = get<std::uint64_t>(is);
  if (nspec == 0 || nspec > 1024 || k.points_ < 4 || k.points_ > (std::uint64_t{1} << 26)) {
    fail(ErrorKind::Io, "kernel lattice cache: implausible dimensions");
  }
  for (std::uint64_t s = 0; s < nspec; ++s) {
    const auto n = get<std::int32_t>(is);
    const auto d = get<std::int32_t>(is);
    KernelSpec{n, d, k.eta_det_}.validate();
    k.nd_.emplace_back(n, d);
  }
  k.values_.resize(k.points_ * nspec);
  is.read(reinterpret_cast<char*>(k.values_.data()),
          static_cast<std::streamsize>(k.values_.size() * sizeof(double)));
  if (!is) fail(ErrorKind::Io, "kernel lattice cache: truncated values");
  return k;
}

}  // namespace tbcv
