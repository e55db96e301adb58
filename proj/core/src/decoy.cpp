#include "tbcv/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "tbcv/simplex.hpp"

namespace tbcv {

namespace {

// Absolute slack on LP rows and results so that rounding never excludes the truth.
constexpr double kRowSlack = 1e-13;
constexpr double kResultSlack = 1e-12;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

BoundPair clamp_range(BoundPair b, double lo, double hi) {
  b.lower = std::clamp(b.lower, lo, hi);
  b.upper = std::clamp(b.upper, lo, hi);
  return b;
}

}  // namespace

BoundPair operator+(const BoundPair& a, const BoundPair& b) {
  return {a.lower + b.lower, a.upper + b.upper, a.epsilon + b.epsilon};
}

BoundPair operator*(double s, const BoundPair& b) {
  if (s >= 0.0) return {s * b.lower, s * b.upper, b.epsilon};
  return {s * b.upper, s * b.lower, b.epsilon};
}

void YieldTable::add(const YieldEntry& e) {
  if (!(e.intensity >= 0.0)) fail(ErrorKind::Config, "yield entry with negative intensity");
  if (!(e.halfwidth >= 0.0)) fail(ErrorKind::Config, "yield entry with negative half-width");
  entries_.push_back(e);
}

std::vector<YieldEntry> YieldTable::select(SourceConfig cfg, Observable obs) const {
  std::vector<YieldEntry> out;
  for (const auto& e : entries_) {
    if (e.config == cfg && e.observable == obs) out.push_back(e);
  }
  return out;
}

std::optional<YieldEntry> YieldTable::find(double intensity, SourceConfig cfg,
                                           Observable obs) const {
  for (const auto& e : entries_) {
    if (e.config == cfg && e.observable == obs && e.intensity == intensity) return e;
  }
  return std::nullopt;
}

BoundPair lp_photon_yield_bounds(const std::vector<IntensityInterval>& rows, int m, int Nc) {
  if (Nc < 0 || m < 0) fail(ErrorKind::Domain, "lp_photon_yield_bounds: negative photon number");
  if (rows.empty()) fail(ErrorKind::Config, "lp_photon_yield_bounds: no intensity constraints");
  if (m > Nc) return {0.0, 1.0, 0.0};

  const int n = Nc + 1;
  LinearProgram lp;
  lp.c.assign(n, 0.0);
  lp.lower.assign(n, 0.0);
  lp.upper.assign(n, 1.0);
  for (const auto& e : rows) {
    std::vector<double> a(n);
    double mass = 0.0;
    for (int k = 0; k < n; ++k) {
      a[k] = poisson(e.intensity, k);
      mass += a[k];
    }
    const double tail = std::max(0.0, 1.0 - mass);
    lp.rows.push_back({a, RowSense::LessEq, clamp01(e.upper) + kRowSlack});
    lp.rows.push_back({a, RowSense::GreaterEq, clamp01(e.lower) - tail - kRowSlack});
  }

  lp.c[m] = 1.0;
  const auto lo = solve_lp(lp);
  lp.c[m] = -1.0;
  const auto hi = solve_lp(lp);
  if (lo.status != LpStatus::Optimal || hi.status != LpStatus::Optimal) {
    fail(ErrorKind::Inconsistent, "decoy LP infeasible");
  }
  BoundPair b;
  b.lower = clamp01(lo.objective - kResultSlack);
  b.upper = clamp01(-hi.objective + kResultSlack);
  return b;
}

BoundPair lp_yield_bounds(const YieldTable& table, SourceConfig cfg, Observable obs, int m,
                          int Nc) {
  const auto entries = table.select(cfg, obs);
  if (entries.empty()) {
    fail(ErrorKind::Config, "yield table lacks config " + std::string(config_id(cfg)) +
                                " observable " + std::string(observable_id(obs)));
  }
  std::vector<IntensityInterval> rows;
  for (const auto& e : entries) {
    rows.push_back({e.intensity, e.value - e.halfwidth, e.value + e.halfwidth});
  }
  try {
    return lp_photon_yield_bounds(rows, m, Nc);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::Inconsistent) throw;
    fail(ErrorKind::Inconsistent, "decoy LP infeasible for config " +
                                      std::string(config_id(cfg)) + " observable " +
                                      std::string(observable_id(obs)));
  }
}

BoundPair cat_state_combination(int m, int sign, const std::map<SourceConfig, BoundPair>& y_m,
                                double pr_m) {
  if (sign != 1 && sign != -1) fail(ErrorKind::Domain, "cat_state_combination: sign must be +-1");
  auto get = [&](SourceConfig c) -> const BoundPair& {
    const auto it = y_m.find(c);
    if (it == y_m.end()) {
      fail(ErrorKind::Config, "cat_state_combination: missing config " + std::string(config_id(c)));
    }
    return it->second;
  };
  BoundPair r;
  if (m == 1) {
    r = sign > 0 ? get(SourceConfig::Phi0) : get(SourceConfig::Phi180);
  } else if (m == 2) {
    const double s = static_cast<double>(sign);
    r = get(SourceConfig::Z) + (0.5 * s) * (get(SourceConfig::Phi0) + get(SourceConfig::Phi180)) +
        (-0.5 * s) * (get(SourceConfig::Phi90) + get(SourceConfig::Phi270));
  } else {
    fail(ErrorKind::Unsupported, "cat_state_combination: only m = 1, 2 are implemented");
  }
  return clamp_range(pr_m * r, 0.0, pr_m);
}

TaggedBounds assemble_from(const YieldBoundFn& y, const BoundPair& vacuum_yield, double tau,
                           double mu, VacuumFactor vacuum, bool allow_zero_gain) {
  const auto rc = region_coefficients(tau, vacuum);
  const double p1 = poisson(mu, 1);
  const double p2 = poisson(mu, 2);

  auto per_config = [&](Observable obs, int m) {
    std::map<SourceConfig, BoundPair> out;
    const auto cfgs = m == 1 ? std::vector<SourceConfig>{SourceConfig::Phi0, SourceConfig::Phi180}
                             : std::vector<SourceConfig>(kAllConfigs.begin(), kAllConfigs.end());
    for (auto c : cfgs) out[c] = y(c, obs, m);
    return out;
  };

  TaggedBounds t;
  t.q_star_0 = clamp_range(rc.vac_accept * vacuum_yield, 0.0, 1.0);

  t.q11 = (rc.c1 * p1) * (y(SourceConfig::Z, Observable::P01, 1) +
                          y(SourceConfig::Z, Observable::P10, 1));
  t.err11 = (0.5 * rc.c1 * p1) *
            (cat_state_combination(1, +1, {{SourceConfig::Phi0,
                                             y(SourceConfig::Phi0, Observable::Psi1Minus, 1)}}) +
             cat_state_combination(1, -1, {{SourceConfig::Phi180,
                                             y(SourceConfig::Phi180, Observable::Psi1Plus, 1)}}));

  t.q22 = p2 * (rc.c2_02 * (y(SourceConfig::Z, Observable::P02, 2) +
                            y(SourceConfig::Z, Observable::P20, 2)) +
                rc.c2_11 * y(SourceConfig::Z, Observable::P11, 2));
  t.err22 = p2 * ((0.5 * (rc.c2_02 - rc.c2_11)) *
                      cat_state_combination(2, +1, per_config(Observable::Psi2Minus, 2)) +
                  (0.5 * (rc.c2_02 + rc.c2_11)) *
                      cat_state_combination(2, -1, per_config(Observable::Psi2Plus, 2)) +
                  rc.c2_11 * cat_state_combination(2, -1, per_config(Observable::P11, 2)));

  t.q11 = clamp_range(t.q11, 0.0, 1.0);
  t.q22 = clamp_range(t.q22, 0.0, 1.0);
  t.err11 = clamp_range(t.err11, 0.0, 1.0);
  t.err22 = clamp_range(t.err22, 0.0, 1.0);

  auto rate = [&](const BoundPair& err, const BoundPair& gain, const char* what) {
    BoundPair e;
    if (!(gain.lower > 0.0)) {
      if (!allow_zero_gain) fail(ErrorKind::UndefinedRate, std::string(what) + ": zero gain bound");
      e.epsilon = err.epsilon + gain.epsilon;
      return e;
    }
    e.lower = std::clamp(err.lower / gain.upper, 0.0, 1.0);
    e.upper = std::clamp(err.upper / gain.lower, 0.0, 1.0);
    e.epsilon = err.epsilon + gain.epsilon;
    return e;
  };
  t.e11 = rate(t.err11, t.q11, "e11");
  t.e22 = rate(t.err22, t.q22, "e22");
  return t;
}

TaggedBounds assemble_tagged_bounds(const YieldTable& table, double tau, double mu,
                                    VacuumFactor vacuum, int Nc) {
  if (table.empty()) fail(ErrorKind::Config, "empty yield table");
  const auto vac = table.find(mu, SourceConfig::Z, Observable::P00);
  if (!vac) fail(ErrorKind::Config, "yield table lacks the signal-intensity vacuum entry");
  const BoundPair vacuum_yield{clamp01(vac->value - vac->halfwidth),
                               clamp01(vac->value + vac->halfwidth), 0.0};
  std::map<std::tuple<SourceConfig, Observable, int>, BoundPair> memo;
  auto y = [&](SourceConfig c, Observable o, int m) {
    const auto key = std::make_tuple(c, o, m);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const auto b = lp_yield_bounds(table, c, o, m, Nc);
    memo.emplace(key, b);
    return b;
  };
  return assemble_from(y, vacuum_yield, tau, mu, vacuum);
}

KeyRate key_rate_from_bounds(const TaggedBounds& b, const ZStats& z, double f) {
  KeyRateInput in;
  in.f = f;
  in.max_m = 2;
  in.stats.q_star_0 = b.q_star_0.lower;
  in.stats.q_mm[1] = b.q11.lower;
  in.stats.q_mm[2] = b.q22.lower;
  in.stats.e_x_mm[1] = b.e11.upper;
  in.stats.e_x_mm[2] = b.e22.upper;
  in.stats.q_z = z.q_z;
  in.stats.e_z = z.e_z;
  return key_rate_reverse(in);
}

KeyRate key_rate_with_decoy(const YieldTable& table, const ProtocolParams& protocol) {
  if (table.empty()) fail(ErrorKind::Config, "empty yield table");
  if (!table.key_map) fail(ErrorKind::Config, "yield table lacks key-map statistics");
  const auto b = assemble_tagged_bounds(table, protocol.tau, protocol.mu, protocol.vacuum);
  return key_rate_from_bounds(b, *table.key_map, protocol.f);
}

YieldTable make_yield_table(const ProtocolParams& protocol, const ChannelParams& channel) {
  const auto model = YieldModel::from(channel);
  YieldTable t;
  for (double mu : protocol.intensities()) {
    for (auto cfg : kAllConfigs) {
      for (auto obs : kAllObservables) {
        t.add({mu, cfg, obs, observed_yield(cfg, mu, obs, model), 0.0});
      }
    }
  }
  t.key_map = z_gain_and_error(protocol.mu, model.eta, model.xi, protocol.tau);
  return t;
}

TaggedBounds exact_tagged_bounds(const ProtocolParams& protocol, const ChannelParams& channel) {
  const auto model = YieldModel::from(channel);
  auto y = [&](SourceConfig c, Observable o, int m) {
    const double v = photon_yields(c, o, model, m)[m];
    return BoundPair{v, v, 0.0};
  };
  const double v0 = observed_yield(SourceConfig::Z, protocol.mu, Observable::P00, model);
  return assemble_from(y, {v0, v0, 0.0}, protocol.tau, protocol.mu, protocol.vacuum);
}

KeyRate infinite_decoy_key_rate(const ProtocolParams& protocol, const ChannelParams& channel) {
  const auto b = exact_tagged_bounds(protocol, channel);
  const auto model = YieldModel::from(channel);
  const auto z = z_gain_and_error(protocol.mu, model.eta, model.xi, protocol.tau);
  return key_rate_from_bounds(b, z, protocol.f);
}

}  // namespace tbcv
