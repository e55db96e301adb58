#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tbcv/channel.hpp"
#include "tbcv/keyrate.hpp"
#include "tbcv/yields.hpp"

namespace tbcv {

struct BoundPair {
  double lower = 0.0;
  double upper = 1.0;
  double epsilon = 0.0;  // failure probability consumed

  bool contains(double v, double tol = 0.0) const { return v >= lower - tol && v <= upper + tol; }
  double width() const { return upper - lower; }
};

BoundPair operator+(const BoundPair& a, const BoundPair& b);
/// Scale with sign handling (a negative factor swaps the ends).
BoundPair operator*(double s, const BoundPair& b);

struct YieldEntry {
  double intensity = 0.0;
  SourceConfig config = SourceConfig::Z;
  Observable observable = Observable::P00;
  double value = 0.0;
  double halfwidth = 0.0;
};

/// Observed expectations keyed by (intensity, config, observable) plus key-map statistics at the signal intensity.
class YieldTable {
 public:
  void add(const YieldEntry& e);
  const std::vector<YieldEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::vector<YieldEntry> select(SourceConfig cfg, Observable obs) const;
  std::optional<YieldEntry> find(double intensity, SourceConfig cfg, Observable obs) const;

  std::optional<ZStats> key_map;

 private:
  std::vector<YieldEntry> entries_;
};

/// CSV header `intensity,config,observable,value,halfwidth`; key-map rows use observables `qz` and `ez`.
void write_yield_table(std::ostream& os, const YieldTable& table);
YieldTable read_yield_table(std::istream& is);

struct ProtocolParams {
  double mu = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  double tau = 1.0;
  int max_m = 2;
  double f = 1.0;
  VacuumFactor vacuum = VacuumFactor::Consistent;

  std::vector<double> intensities() const { return {mu, nu1, nu2, 0.0}; }
};

inline constexpr int kDecoyCutoff = 10;

struct IntensityInterval {
  double intensity = 0.0;
  double lower = 0.0;
  double upper = 1.0;
};

/// LP over per-photon yields y_0..y_Nc in [0,1]: each observed interval constrains
/// sum_k Pr(k) y_k, with the Poisson tail beyond Nc as slack on the lower side.
BoundPair lp_photon_yield_bounds(const std::vector<IntensityInterval>& rows, int m,
                                 int Nc = kDecoyCutoff);

/// lp_photon_yield_bounds on the (config, observable) rows of a table.
BoundPair lp_yield_bounds(const YieldTable& table, SourceConfig cfg, Observable obs, int m,
                          int Nc = kDecoyCutoff);

/// Bounds on pr_m * Tr[N(Psi_m^sign) O] from per-config bounds on y_m[O]; clamped to [0, pr_m].
BoundPair cat_state_combination(int m, int sign, const std::map<SourceConfig, BoundPair>& y_m,
                                double pr_m = 1.0);

struct TaggedBounds {
  BoundPair q_star_0;
  BoundPair q11;
  BoundPair q22;
  BoundPair err11;  // e11 * Q11
  BoundPair err22;  // e22 * Q22
  BoundPair e11;
  BoundPair e22;
};

using YieldBoundFn = std::function<BoundPair(SourceConfig, Observable, int)>;

/// Combines per-photon yield bounds with region coefficients and Poisson weights.
/// A zero lower gain bound raises UndefinedRate unless allow_zero_gain, which yields e in [0, 1].
TaggedBounds assemble_from(const YieldBoundFn& y, const BoundPair& vacuum_yield, double tau,
                           double mu, VacuumFactor vacuum = VacuumFactor::Consistent,
                           bool allow_zero_gain = false);

TaggedBounds assemble_tagged_bounds(const YieldTable& table, double tau, double mu,
                                    VacuumFactor vacuum = VacuumFactor::Consistent,
                                    int Nc = kDecoyCutoff);

/// Worst-case reverse rate over the bounds (lower gains, upper errors).
KeyRate key_rate_from_bounds(const TaggedBounds& b, const ZStats& z, double f);

KeyRate key_rate_with_decoy(const YieldTable& table, const ProtocolParams& protocol);

/// Exact observed yields for every config, observable and intensity, plus key-map statistics.
YieldTable make_yield_table(const ProtocolParams& protocol, const ChannelParams& channel);

/// Infinite-decoy tag bounds: exact per-photon yields in place of the LP.
TaggedBounds exact_tagged_bounds(const ProtocolParams& protocol, const ChannelParams& channel);

/// Infinite-decoy key rate of the two-photon protocol.
KeyRate infinite_decoy_key_rate(const ProtocolParams& protocol, const ChannelParams& channel);

}  // namespace tbcv
