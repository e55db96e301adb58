#include "cli/reproduce.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>

#include "cli/reference_data.hpp"
#include "tbcv/error.hpp"
#include "tbcv/keyrate.hpp"
#include "tbcv/optimizer.hpp"

namespace tbcv::cli {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<double> range(double start, double stop, double step) {
  std::vector<double> v;
  for (int k = 0; start + step * k <= stop + 1e-9; ++k) v.push_back(start + step * k);
  return v;
}

ChannelParams channel(double km, double xi = 0.0, double delta_deg = 0.0) {
  ChannelParams ch;
  ch.distance_km = xi > 0.0 ? std::max(km, kNoisyZeroDistanceKm) : km;
  ch.excess_noise_xi = xi;
  ch.misalignment_delta = delta_deg * kDeg;
  return ch;
}

ChannelParams practical(double km) { return channel(km, kPracticalExcessNoise, kPracticalMisalignmentDeg); }

const std::vector<double>& or_default(const std::vector<double>& given, const std::vector<double>& fallback) {
  return given.empty() ? fallback : given;
}

void fig3a(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const auto kms = or_default(rc.distances_km, range(0, 40, 1));
  auto os = out.open("fig3a.csv");
  csv_row(os, {"distance_km", "rate_i1", "rate_i2", "rate_i3", "rate_i4", "plob"});
  for (double km : kms) {
    const auto ch = channel(km);
    std::vector<std::string> row{num(km)};
    for (int i = 1; i <= 4; ++i) {
      const auto r = optimize(default_search_space(Objective::IdealPhotons, i), ch, rc.threads);
      row.push_back(num(std::max(0.0, r.rate)));
    }
    row.push_back(num(plob_or_inf(ch.transmittance())));
    csv_row(os, row);
  }
  out.close(os, "fig3a.csv");
  report["rows"] = kms.size();
  log << "fig3a: " << kms.size() << " distances x 4 protocols\n";
}

void fig3b(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  auto os = out.open("fig3b.csv");
  csv_row(os, {"distance_km", "photons", "mu", "tau", "vacuum", "m1", "m2", "m3", "m4"});
  int rows = 0;
  for (double km : {0.0, 10.0, 20.0, 40.0}) {
    const auto ch = channel(km);
    for (int i = 1; i <= 4; ++i) {
      const auto r = optimize(default_search_space(Objective::IdealPhotons, i), ch, rc.threads);
      const auto s = closed_form_tag_stats(i, r.best.mu, r.best.tau, ch);
      double raw = s.q_star_0;
      for (int m = 1; m <= i; ++m) raw += s.q_mm.at(m);
      std::vector<std::string> row{num(km), std::to_string(i), num(r.best.mu), num(r.best.tau), num(s.q_star_0 / raw)};
      for (int m = 1; m <= 4; ++m) row.push_back(num(m <= i ? s.q_mm.at(m) / raw : 0.0));
      csv_row(os, row);
      ++rows;
    }
  }
  out.close(os, "fig3b.csv");
  report["rows"] = rows;
  log << "fig3b: relative contributions at 0/10/20/40 km\n";
}

// Infinite-decoy two-photon optimum over the default grid for each (parameter, distance).
template <class ChannelOf>
void infinite_decoy_sweep(const RunConfig& rc, ArtifactSet& out, Report& report, const char* name,
                          const char* column, const std::vector<double>& params, const std::vector<double>& kms,
                          ChannelOf&& channel_of) {
  const auto space = default_search_space(Objective::InfiniteDecoy);
  auto os = out.open(name);
  csv_row(os, {column, "distance_km", "mu", "tau", "rate"});
  for (double v : params) {
    for (double km : kms) {
      const auto r = optimize(space, channel_of(v, km), rc.threads);
      csv_row(os, {num(v), num(km), num(r.best.mu), num(r.best.tau), num(std::max(0.0, r.rate))});
    }
  }
  out.close(os, name);
  report["rows"] = params.size() * kms.size();
}

void fig5a(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const auto kms = or_default(rc.distances_km, range(0, 40, 2));
  const auto xis = or_default(rc.excess_noise_grid_snu, {1e-3, 2e-3, 5e-3, 1e-2});
  infinite_decoy_sweep(rc, out, report, "fig5a.csv", "excess_noise_snu", xis, kms,
                       [](double xi, double km) { return channel(km, xi, 0.0); });
  log << "fig5a: " << xis.size() << " noise levels x " << kms.size() << " distances\n";
}

void fig5b(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const auto kms = or_default(rc.distances_km, range(0, 40, 2));
  const auto deltas = or_default(rc.misalignment_grid_deg, {0.0, 5.0, 10.0, 15.0, 20.0});
  infinite_decoy_sweep(rc, out, report, "fig5b.csv", "misalignment_deg", deltas, kms,
                       [](double deg, double km) { return channel(km, 0.0, deg); });
  log << "fig5b: " << deltas.size() << " misalignments x " << kms.size() << " distances\n";
}

ProtocolParams decoy_protocol(double mu, double tau, double nu1, double nu2) {
  ProtocolParams p;
  p.mu = mu;
  p.tau = tau;
  p.nu1 = nu1;
  p.nu2 = nu2;
  return p;
}

std::optional<double> lp_rate(const ProtocolParams& p, const ChannelParams& ch) {
  try {
    return key_rate_with_decoy(make_yield_table(p, ch), p).raw;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UndefinedRate) throw;
    return std::nullopt;
  }
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

void fig5c(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  auto os = out.open("fig5c.csv");
  csv_row(os, {"setup", "distance_km", "mu", "tau", "nu1", "nu2", "lp_rate", "infinite_rate", "relative_gap"});
  auto row = [&](const char* setup, double km, const ProtocolParams& p, const ChannelParams& ch) {
    const auto lp = lp_rate(p, ch);
    const double inf = infinite_decoy_key_rate(p, ch).raw;
    const std::string gap = lp && inf != 0.0 ? num(std::abs(*lp - inf) / std::abs(inf)) : "";
    csv_row(os, {setup, num(km), num(p.mu), num(p.tau), num(p.nu1), num(p.nu2), opt_num(lp), num(inf), gap});
  };
  for (const auto& r : kReferenceDecoyRows) {
    row("practical", r.distance_km, decoy_protocol(r.mu, r.tau, r.nu1, r.nu2), practical(r.distance_km));
  }
  auto space = default_search_space(Objective::Decoy);
  space.nu1 = {kNoiselessDecoy1};
  space.nu2 = {kNoiselessDecoy2};
  for (const auto& r : kReferenceDecoyRows) {
    const auto ch = channel(r.distance_km);
    const auto best = optimize(space, ch, rc.threads);
    row("noiseless", r.distance_km, decoy_protocol(best.best.mu, best.best.tau, best.best.nu1, best.best.nu2), ch);
  }
  out.close(os, "fig5c.csv");
  report["rows"] = 2 * kReferenceDecoyRows.size();
  log << "fig5c: practical and noiseless decoy setups\n";
}

void table3(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  auto os = out.open("table3.csv");
  csv_row(os, {"distance_km", "photons", "mu", "tau", "rate", "e_z_percent", "reference_mu", "reference_tau",
               "reference_e_z_percent", "e_z_at_reference_percent", "diff_pp"});
  double worst = 0.0;
  int matched = 0;
  for (const auto& ref : kReferenceOptima) {
    const auto ch = channel(ref.distance_km);
    const auto r = optimize(default_search_space(Objective::IdealPhotons, ref.photons), ch, rc.threads);
    const double e_ref = 100.0 * closed_form_tag_stats(ref.photons, ref.mu, ref.tau, ch).e_z;
    const double diff = e_ref - ref.e_z_percent;
    worst = std::max(worst, std::abs(diff));
    matched += std::abs(r.best.mu - ref.mu) <= 1e-3 && std::abs(r.best.tau - ref.tau) <= 1e-3;
    csv_row(os, {num(ref.distance_km), std::to_string(ref.photons), num(r.best.mu), num(r.best.tau), num(r.rate),
                 num(100.0 * r.e_z), num(ref.mu), num(ref.tau), num(ref.e_z_percent), num(e_ref), num(diff)});
  }
  out.close(os, "table3.csv");
  report["cells"] = kReferenceOptima.size();
  report["max_abs_diff_pp"] = jnum(worst);
  report["optimizer_matches_reference"] = matched;
  log << "table3: max |e_z - reference| " << num(worst) << " pp, optimizer at the reference point in " << matched
      << "/" << kReferenceOptima.size() << " cells\n";
}

void table5(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const auto kms = or_default(rc.distances_km, range(0, 25, 5));
  const auto space = default_search_space(Objective::Decoy);
  auto os = out.open("table5.csv");
  csv_row(os, {"distance_km", "mu", "tau", "nu1", "nu2", "rate", "infinite_rate", "reference_mu", "reference_tau",
               "reference_nu1", "reference_nu2", "reference_rate"});
  for (double km : kms) {
    const auto ch = practical(km);
    const auto r = optimize(space, ch, rc.threads);
    const double inf = infinite_decoy_key_rate(decoy_protocol(r.best.mu, r.best.tau, r.best.nu1, r.best.nu2), ch).raw;
    std::vector<std::string> row{num(km),         num(r.best.mu), num(r.best.tau), num(r.best.nu1),
                                 num(r.best.nu2), num(r.rate),    num(inf)};
    const ReferenceDecoyRow* ref = nullptr;
    for (const auto& x : kReferenceDecoyRows) {
      if (x.distance_km == km) ref = &x;
    }
    if (ref) {
      const auto lp = lp_rate(decoy_protocol(ref->mu, ref->tau, ref->nu1, ref->nu2), ch);
      for (double v : {ref->mu, ref->tau, ref->nu1, ref->nu2}) row.push_back(num(v));
      row.push_back(opt_num(lp));
    } else {
      row.insert(row.end(), 5, "");
    }
    csv_row(os, row);
    log << "table5: " << num(km) << " km rate " << num(r.rate) << '\n';
  }
  out.close(os, "table5.csv");
  report["rows"] = kms.size();
}

}  // namespace

void reproduce(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  switch (*rc.target) {
    case Target::Fig3a:
      return fig3a(rc, out, report, log);
    case Target::Fig3b:
      return fig3b(rc, out, report, log);
    case Target::Fig5a:
      return fig5a(rc, out, report, log);
    case Target::Fig5b:
      return fig5b(rc, out, report, log);
    case Target::Fig5c:
      return fig5c(rc, out, report, log);
    case Target::Table3:
      return table3(rc, out, report, log);
    case Target::Table5:
      return table5(rc, out, report, log);
  }
}

}  // namespace tbcv::cli
