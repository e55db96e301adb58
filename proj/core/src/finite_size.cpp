#include "tbcv/finite_size.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <tuple>
#include <utility>

#include "tbcv/specfun.hpp"

namespace tbcv {

namespace {

constexpr std::size_t kConfigCount = kAllConfigs.size();

std::size_t obs_index(Observable obs) {
  for (std::size_t i = 0; i < kAllObservables.size(); ++i) {
    if (kAllObservables[i] == obs) return i;
  }
  fail(ErrorKind::Domain, "unknown observable");
}

std::size_t config_index(SourceConfig cfg) {
  for (std::size_t i = 0; i < kConfigCount; ++i) {
    if (kAllConfigs[i] == cfg) return i;
  }
  fail(ErrorKind::Domain, "unknown source configuration");
}

double split_budget(const FiniteOptions& opt, int applications) {
  if (!(opt.epsilon_total > 0.0 && opt.epsilon_total < 1.0)) {
    fail(ErrorKind::Budget, "epsilon budget must lie in (0, 1)");
  }
  const double each = opt.epsilon_total / applications;
  if (!(each > 0.0)) fail(ErrorKind::Budget, "epsilon budget exhausted by the split");
  return each;
}

double deviation(const FiniteOptions& opt, double n, double c, double eps) {
  if (!opt.apply_corrections) return 0.0;
  return azuma_deviation({n, c, eps});
}

// Yield interval from a kernel sum over rounds with probability p of matching the test.
IntensityInterval yield_interval(double intensity, double sum, double n, double p, double delta) {
  const double scale = n * p;
  return {intensity, (sum - delta) / scale, (sum + delta) / scale};
}

BoundPair count_bounds(const BoundPair& per_round, double n_p, double delta, double eps) {
  return {std::max(0.0, n_p * per_round.lower - delta), n_p * per_round.upper + delta, eps};
}

// Tag counts divided by the number of signal key rounds; rate bounds are unchanged.
TaggedBounds per_round_bounds(const TaggedBounds& counts, double key_rounds, double eps) {
  TaggedBounds out = counts;
  const double inv = 1.0 / key_rounds;
  for (BoundPair* b : {&out.q_star_0, &out.q11, &out.q22, &out.err11, &out.err22}) {
    *b = inv * *b;
    b->epsilon = eps;
  }
  return out;
}

// (config, observable) pairs whose photon yields enter the tag assembly.
const std::vector<std::pair<SourceConfig, Observable>>& assembly_pairs() {
  static const std::vector<std::pair<SourceConfig, Observable>> pairs = [] {
    std::vector<std::pair<SourceConfig, Observable>> p = {
        {SourceConfig::Z, Observable::P01},        {SourceConfig::Z, Observable::P10},
        {SourceConfig::Z, Observable::P02},        {SourceConfig::Z, Observable::P20},
        {SourceConfig::Z, Observable::P11},        {SourceConfig::Phi0, Observable::Psi1Minus},
        {SourceConfig::Phi180, Observable::Psi1Plus}};
    for (auto c : kAllConfigs) {
      p.emplace_back(c, Observable::Psi2Plus);
      p.emplace_back(c, Observable::Psi2Minus);
      if (c != SourceConfig::Z) p.emplace_back(c, Observable::P11);
    }
    return p;
  }();
  return pairs;
}

}  // namespace

void AzumaQuery::validate() const {
  if (!(n >= 1.0)) fail(ErrorKind::Domain, "azuma: need n >= 1");
  if (!(c > 0.0)) fail(ErrorKind::Domain, "azuma: need c > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(ErrorKind::Domain, "azuma: need epsilon in (0, 1)");
}

double azuma_deviation(const AzumaQuery& q) {
  q.validate();
  return q.c * std::sqrt(q.n * std::log(1.0 / q.epsilon) / 2.0);
}

KernelBounds standard_kernel_bounds(double eta_det) {
  static std::mutex mutex;
  static std::vector<std::pair<double, KernelBounds>> cache;
  {
    const std::lock_guard<std::mutex> lock(mutex);
    for (const auto& [eta, b] : cache) {
      if (eta == eta_det) return b;
    }
  }
  KernelBounds b{};
  const auto& specs = standard_kernel_specs();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    b[i] = kernel_bound({specs[i].first, specs[i].second, eta_det});
  }
  const std::lock_guard<std::mutex> lock(mutex);
  cache.emplace_back(eta_det, b);
  return b;
}

RoundAccumulator::RoundAccumulator(double tau, const KernelLattice& lattice)
    : tau_(tau),
      lattice_(&lattice),
      sums_(kIntensityLevels * kConfigCount),
      tomo_counts_(kIntensityLevels * kConfigCount, 0) {
  if (!(tau > 0.0)) fail(ErrorKind::Domain, "accumulator: tau must be positive");
  for (auto& s : sums_) s.fill(0.0);
}

std::size_t RoundAccumulator::cell(int a, SourceConfig cfg) {
  if (a < 0 || a >= kIntensityLevels) fail(ErrorKind::Domain, "intensity index out of range");
  return static_cast<std::size_t>(a) * kConfigCount + config_index(cfg);
}

void RoundAccumulator::add(const RoundRecord& r) {
  ++rounds_;
  const int a = r.intensity;
  if (r.bob_basis == BobBasis::Tomography) {
    const auto k1 = standard_kernels(*lattice_, r.q1, r.phi1);
    const auto k2 = standard_kernels(*lattice_, r.q2, r.phi2);
    const std::size_t c = cell(a, r.config());
    for (std::size_t i = 0; i < kAllObservables.size(); ++i) {
      sums_[c][i] += observable_sample(kAllObservables[i], k1, k2);
    }
    ++tomo_counts_[c];
  } else if (r.alice_basis == AliceBasis::Z) {
    ++key_rounds_[a];
    const int bit = decode_key_bit(r.q1, r.q2, tau_);
    if (bit >= 0) {
      ++key_accepted_[a];
      if (bit != r.key_bit) ++key_errors_[a];
    }
    ++tags_[a][static_cast<int>(r.tag)];
  }
}

void RoundAccumulator::add(const std::vector<RoundRecord>& records) {
  for (const auto& r : records) add(r);
}

double RoundAccumulator::kernel_sum(int a, SourceConfig cfg, Observable obs) const {
  return sums_[cell(a, cfg)][obs_index(obs)];
}

std::uint64_t RoundAccumulator::tomography_rounds(int a, SourceConfig cfg) const {
  return tomo_counts_[cell(a, cfg)];
}

std::uint64_t RoundAccumulator::tag_count(int a, VirtualTag tag) const {
  if (a < 0 || a >= kIntensityLevels) fail(ErrorKind::Domain, "intensity index out of range");
  return tags_[a][static_cast<int>(tag)];
}

Q11Finite q11_finite_from_sums(const std::array<double, kIntensityLevels>& sums, double rounds,
                               const SimulationSettings& settings, const ProtocolParams& protocol,
                               double estimator_bound, const FiniteOptions& options) {
  settings.validate();
  if (!(rounds >= 1.0)) fail(ErrorKind::Domain, "finite Q11: need at least one round");
  if (!(estimator_bound > 0.0)) fail(ErrorKind::Domain, "finite Q11: estimator bound must be positive");
  Q11Finite out;
  out.applications = 2 * kIntensityLevels + 2;
  out.epsilon_each = split_budget(options, out.applications);

  const auto mus = protocol.intensities();
  std::vector<IntensityInterval> rows;
  for (int a = 0; a < kIntensityLevels; ++a) {
    const double p = settings.round_probability(a, SourceConfig::Z, BobBasis::Tomography);
    if (!(p > 0.0)) fail(ErrorKind::Config, "finite Q11: no Z-configuration tomography rounds at intensity index " + std::to_string(a));
    const double delta = deviation(options, rounds, 2.0 * estimator_bound, out.epsilon_each);
    rows.push_back(yield_interval(mus[a], sums[a], rounds, p, delta));
  }
  out.yield1 = lp_photon_yield_bounds(rows, 1, options.Nc);

  const auto rc = region_coefficients(protocol.tau, protocol.vacuum);
  const double n_p = rounds * settings.round_probability(0, SourceConfig::Z, BobBasis::Key);
  out.expected = (n_p * rc.c1 * poisson(protocol.mu, 1)) * out.yield1;
  out.expected.epsilon = 2.0 * kIntensityLevels * out.epsilon_each;
  const double delta1 = deviation(options, rounds, 1.0, out.epsilon_each);
  out.count = {std::max(0.0, out.expected.lower - delta1), out.expected.upper + delta1,
               options.epsilon_total};
  return out;
}

Q11Finite estimate_q11_finite(const RoundAccumulator& acc, const SimulationSettings& settings,
                              const ProtocolParams& protocol, const KernelBounds& bounds,
                              const FiniteOptions& options) {
  std::array<double, kIntensityLevels> sums{};
  for (int a = 0; a < kIntensityLevels; ++a) {
    if (acc.tomography_rounds(a, SourceConfig::Z) == 0) {
      fail(ErrorKind::Config, "records lack Z-configuration tomography rounds at intensity index " +
                                  std::to_string(a));
    }
    sums[a] = acc.kernel_sum(a, SourceConfig::Z, Observable::P01) +
              acc.kernel_sum(a, SourceConfig::Z, Observable::P10);
  }
  const double r = observable_sample_bound(Observable::P01, bounds) +
                   observable_sample_bound(Observable::P10, bounds);
  return q11_finite_from_sums(sums, static_cast<double>(acc.rounds()), settings, protocol, r, options);
}

Q11Finite estimate_q11_finite(const std::vector<RoundRecord>& records,
                              const SimulationSettings& settings, const ProtocolParams& protocol,
                              const FiniteOptions& options) {
  static const KernelLattice lattice(1.0, standard_kernel_specs());
  RoundAccumulator acc(protocol.tau, lattice);
  acc.add(records);
  return estimate_q11_finite(acc, settings, protocol, standard_kernel_bounds(1.0), options);
}

FiniteTagged finite_tagged_from_sums(const KernelSumFn& sums, double rounds,
                                     const SimulationSettings& settings, const ProtocolParams& protocol,
                                     const KernelBounds& bounds, const FiniteOptions& options) {
  settings.validate();
  const double n = rounds;
  if (!(n >= 1.0)) fail(ErrorKind::Domain, "finite bounds: no rounds");
  const auto& pairs = assembly_pairs();
  FiniteTagged out;
  out.applications = static_cast<int>(pairs.size()) * kIntensityLevels * 2 + 2 + 10;
  out.epsilon_each = split_budget(options, out.applications);
  const double eps = out.epsilon_each;
  const auto mus = protocol.intensities();

  auto interval = [&](int a, SourceConfig cfg, Observable obs) {
    const double p = settings.round_probability(a, cfg, BobBasis::Tomography);
    if (!(p > 0.0)) {
      fail(ErrorKind::Config, "no " + std::string(config_id(cfg)) +
                                  " tomography rounds at intensity index " + std::to_string(a));
    }
    const double delta = deviation(options, n, 2.0 * observable_sample_bound(obs, bounds), eps);
    return yield_interval(mus[a], sums(a, cfg, obs), n, p, delta);
  };

  std::map<std::pair<SourceConfig, Observable>, std::vector<IntensityInterval>> rows;
  for (const auto& pr : pairs) {
    auto& r = rows[pr];
    for (int a = 0; a < kIntensityLevels; ++a) r.push_back(interval(a, pr.first, pr.second));
  }
  std::map<std::tuple<SourceConfig, Observable, int>, BoundPair> memo;
  auto y = [&](SourceConfig c, Observable o, int m) {
    const auto key = std::make_tuple(c, o, m);
    if (const auto it = memo.find(key); it != memo.end()) return it->second;
    const auto it = rows.find({c, o});
    if (it == rows.end()) fail(ErrorKind::Domain, "finite bounds: unplanned yield request");
    const auto b = lp_photon_yield_bounds(it->second, m, options.Nc);
    memo.emplace(key, b);
    return b;
  };
  const auto vac = interval(0, SourceConfig::Z, Observable::P00);
  const BoundPair vacuum_yield{std::clamp(vac.lower, 0.0, 1.0), std::clamp(vac.upper, 0.0, 1.0), 0.0};
  out.expected = assemble_from(y, vacuum_yield, protocol.tau, protocol.mu, protocol.vacuum, true);

  const double n_p = n * settings.round_probability(0, SourceConfig::Z, BobBasis::Key);
  if (!(n_p > 0.0)) fail(ErrorKind::Config, "no signal key rounds");
  const double delta1 = deviation(options, n, 1.0, eps);
  out.counts.q_star_0 = count_bounds(out.expected.q_star_0, n_p, delta1, options.epsilon_total);
  out.counts.q11 = count_bounds(out.expected.q11, n_p, delta1, options.epsilon_total);
  out.counts.q22 = count_bounds(out.expected.q22, n_p, delta1, options.epsilon_total);
  out.counts.err11 = count_bounds(out.expected.err11, n_p, delta1, options.epsilon_total);
  out.counts.err22 = count_bounds(out.expected.err22, n_p, delta1, options.epsilon_total);
  auto ratio = [&](const BoundPair& err, const BoundPair& gain) {
    BoundPair e{0.0, 1.0, options.epsilon_total};
    if (gain.lower > 0.0) {
      e.lower = std::clamp(err.lower / gain.upper, 0.0, 1.0);
      e.upper = std::clamp(err.upper / gain.lower, 0.0, 1.0);
    }
    return e;
  };
  out.counts.e11 = ratio(out.counts.err11, out.counts.q11);
  out.counts.e22 = ratio(out.counts.err22, out.counts.q22);
  out.key_rounds = n_p;
  out.per_round = per_round_bounds(out.counts, n_p, options.epsilon_total);
  return out;
}

FiniteTagged finite_tagged_bounds(const RoundAccumulator& acc, const SimulationSettings& settings,
                                  const ProtocolParams& protocol, const KernelBounds& bounds,
                                  const FiniteOptions& options) {
  for (const auto& [cfg, obs] : assembly_pairs()) {
    for (int a = 0; a < kIntensityLevels; ++a) {
      if (acc.tomography_rounds(a, cfg) == 0) {
        fail(ErrorKind::Config, "records lack " + std::string(config_id(cfg)) +
                                    " tomography rounds at intensity index " + std::to_string(a));
      }
    }
  }
  const auto sums = [&](int a, SourceConfig cfg, Observable obs) { return acc.kernel_sum(a, cfg, obs); };
  auto out = finite_tagged_from_sums(sums, static_cast<double>(acc.rounds()), settings, protocol, bounds,
                                     options);
  out.key_rounds = static_cast<double>(acc.key_rounds(0));
  if (!(out.key_rounds > 0.0)) fail(ErrorKind::Config, "records lack signal key rounds");
  out.per_round = per_round_bounds(out.counts, out.key_rounds, options.epsilon_total);
  const double inv = 1.0 / out.key_rounds;
  out.key_map.q_z = static_cast<double>(acc.key_accepted(0)) * inv;
  out.key_map.e_z = acc.key_accepted(0) > 0
                        ? static_cast<double>(acc.key_errors(0)) / static_cast<double>(acc.key_accepted(0))
                        : 0.5;
  return out;
}

double finite_key_length(double n_zz, const FiniteKeyStats& stats,
                         const std::map<int, double>& eps_pa, double f, double q_z, double e_z) {
  if (!(n_zz > 0.0)) fail(ErrorKind::Domain, "finite key length: N_zz must be positive");
  if (!(f >= 1.0)) fail(ErrorKind::Config, "finite key length: reconciliation efficiency f must be >= 1");
  double per_round = stats.q_star_0 - f * q_z * binary_entropy(std::min(e_z, 0.5));
  for (const auto& [m, q] : stats.q_mm) {
    const auto e = stats.e_x_mm.find(m);
    if (e == stats.e_x_mm.end()) fail(ErrorKind::Config, "finite key length: missing phase error for tag " + std::to_string(m));
    per_round += q * (1.0 - binary_entropy(std::min(e->second, 0.5)));
  }
  for (const auto& [m, eps] : eps_pa) {
    if (!(eps > 0.0 && eps <= 1.0)) fail(ErrorKind::Domain, "finite key length: eps_pa must lie in (0, 1]");
    per_round += std::log2(eps) / n_zz;
  }
  return n_zz * per_round;
}

FiniteKeyStats key_stats_from(const TaggedBounds& b) {
  FiniteKeyStats s;
  s.q_star_0 = b.q_star_0.lower;
  s.q_mm = {{1, b.q11.lower}, {2, b.q22.lower}};
  s.e_x_mm = {{1, b.e11.upper}, {2, b.e22.upper}};
  return s;
}

}  // namespace tbcv
