#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "tbcv/decoy.hpp"
#include "tbcv/rounds.hpp"
#include "tbcv/tomo.hpp"

namespace tbcv {

struct AzumaQuery {
  double n = 1.0;
  double c = 1.0;
  double epsilon = 0.5;

  void validate() const;
};

/// delta = c sqrt(n ln(1/epsilon) / 2): one-sided deviation of a martingale with n increments
/// bounded by c that is exceeded with probability at most epsilon.
double azuma_deviation(const AzumaQuery& query);

/// Max |kernel| of each standard spec (order of standard_kernel_specs) at one efficiency.
using KernelBounds = std::array<double, 5>;
KernelBounds standard_kernel_bounds(double eta_det);

/// Sequential fold of round records into the counter sums used by the estimators.
class RoundAccumulator {
 public:
  RoundAccumulator(double tau, const KernelLattice& lattice);

  void add(const RoundRecord& r);
  void add(const std::vector<RoundRecord>& records);

  std::uint64_t rounds() const { return rounds_; }
  /// Sum of observable_sample over tomography rounds with intensity a and configuration cfg.
  double kernel_sum(int a, SourceConfig cfg, Observable obs) const;
  std::uint64_t tomography_rounds(int a, SourceConfig cfg) const;
  std::uint64_t key_rounds(int a) const { return key_rounds_[a]; }
  std::uint64_t key_accepted(int a) const { return key_accepted_[a]; }
  std::uint64_t key_errors(int a) const { return key_errors_[a]; }
  std::uint64_t tag_count(int a, VirtualTag tag) const;

 private:
  static std::size_t cell(int a, SourceConfig cfg);

  double tau_;
  const KernelLattice* lattice_;
  std::uint64_t rounds_ = 0;
  std::vector<std::array<double, kAllObservables.size()>> sums_;
  std::vector<std::uint64_t> tomo_counts_;
  std::array<std::uint64_t, kIntensityLevels> key_rounds_{};
  std::array<std::uint64_t, kIntensityLevels> key_accepted_{};
  std::array<std::uint64_t, kIntensityLevels> key_errors_{};
  std::array<std::array<std::uint64_t, 6>, kIntensityLevels> tags_{};
};

struct FiniteOptions {
  double epsilon_total = 1e-10;
  /// false zeroes every Azuma correction (the infinite-sample limit).
  bool apply_corrections = true;
  int Nc = kDecoyCutoff;
};

struct Q11Finite {
  BoundPair yield1;    // y_1 of |01><01| + |10><10| in the Z configuration
  BoundPair expected;  // sum over rounds of Pr(signal key round tagged (1,1) | past) = N p Q11
  BoundPair count;     // certified bounds on the number of (1,1)-tagged signal key rounds
  double epsilon_each = 0.0;
  int applications = 0;
};

/// Q11 chain from counter sums: per-intensity sums S_a of the |01>+|10> kernel estimator over
/// Z-configuration tomography rounds, Azuma with c = 2 r (r = max |estimator|), decoy LP,
/// then Azuma with c = 1 on the tag counter. The budget is split evenly over
/// 2 * kIntensityLevels + 2 one-sided applications.
Q11Finite q11_finite_from_sums(const std::array<double, kIntensityLevels>& sums, double rounds,
                               const SimulationSettings& settings, const ProtocolParams& protocol,
                               double estimator_bound, const FiniteOptions& options = {});

Q11Finite estimate_q11_finite(const RoundAccumulator& acc, const SimulationSettings& settings,
                              const ProtocolParams& protocol, const KernelBounds& bounds,
                              const FiniteOptions& options = {});

/// Records are folded in order with a lattice at kernel efficiency 1.
Q11Finite estimate_q11_finite(const std::vector<RoundRecord>& records,
                              const SimulationSettings& settings, const ProtocolParams& protocol,
                              const FiniteOptions& options = {});

struct FiniteTagged {
  TaggedBounds expected;  // per signal key round, conditional-expectation bounds
  TaggedBounds counts;    // certified bounds on tag counters (q_* fields hold counts)
  TaggedBounds per_round; // counts divided by the realized number of signal key rounds
  double key_rounds = 0.0;
  ZStats key_map;         // observed on signal key rounds
  double epsilon_each = 0.0;
  int applications = 0;
};

/// Sum of observable_sample over tomography rounds with intensity index a and configuration cfg.
using KernelSumFn = std::function<double(int a, SourceConfig cfg, Observable obs)>;

/// All tags at once: every yield needed by the tag assembly is certified from kernel sums over
/// `rounds` rounds, bounded by the decoy LP, assembled, and converted to counts with a second
/// Azuma step. per_round and key_rounds use the expected number of signal key rounds; key_map is
/// left empty.
FiniteTagged finite_tagged_from_sums(const KernelSumFn& sums, double rounds,
                                     const SimulationSettings& settings, const ProtocolParams& protocol,
                                     const KernelBounds& bounds, const FiniteOptions& options = {});

/// finite_tagged_from_sums on accumulated records; per_round, key_rounds and key_map use the
/// realized signal key rounds.
FiniteTagged finite_tagged_bounds(const RoundAccumulator& acc, const SimulationSettings& settings,
                                  const ProtocolParams& protocol, const KernelBounds& bounds,
                                  const FiniteOptions& options = {});

struct FiniteKeyStats {
  double q_star_0 = 0.0;            // lower bound, per signal key round
  std::map<int, double> q_mm;       // lower bounds
  std::map<int, double> e_x_mm;     // upper bounds
};

/// N_zz [Q*0 + sum_m (Q_mm (1 - h(e_mm)) + log2(eps_pa_m) / N_zz) - f Q^Z h(e^Z)] in bits.
/// Tags absent from eps_pa carry no correction.
double finite_key_length(double n_zz, const FiniteKeyStats& stats,
                         const std::map<int, double>& eps_pa, double f, double q_z, double e_z);

FiniteKeyStats key_stats_from(const TaggedBounds& per_round);

}  // namespace tbcv
