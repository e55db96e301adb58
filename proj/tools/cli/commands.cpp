#include "cli/commands.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "cli/output.hpp"
#include "cli/reproduce.hpp"
#include "tbcv/error.hpp"
#include "tbcv/keyrate.hpp"
#include "tbcv/parallel.hpp"
#include "tbcv/tomo.hpp"

namespace tbcv::cli {
namespace {

constexpr std::size_t kSampleBlock = std::size_t{1} << 16;

void sweep(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const auto& kms = rc.distances_km;
  std::vector<Evaluation> evals(kms.size());
  run_blocks(kms.size(), rc.threads, [&](std::size_t i) {
    evals[i] = evaluate_objective(rc.search, rc.channel_at(kms[i]),
                                  {rc.protocol.mu, rc.protocol.tau, rc.protocol.nu1, rc.protocol.nu2});
  });
  auto os = out.open("sweep.csv");
  csv_row(os, {"distance_km", "transmittance", "rate", "reported_rate", "e_z", "plob", "status"});
  double best = 0.0;
  int undefined = 0;
  for (std::size_t i = 0; i < kms.size(); ++i) {
    const double eta = rc.channel_at(kms[i]).transmittance();
    const bool ok = std::isfinite(evals[i].rate);
    undefined += !ok;
    if (ok) best = std::max(best, evals[i].rate);
    csv_row(os, {num(kms[i]), num(eta), ok ? num(evals[i].rate) : "", ok ? num(std::max(0.0, evals[i].rate)) : "",
                 ok ? num(evals[i].e_z) : "", num(plob_or_inf(eta)), ok ? "ok" : "undefined_rate"});
  }
  out.close(os, "sweep.csv");
  report["objective"] = objective_id(rc.search.objective);
  report["rows"] = kms.size();
  report["undefined_rows"] = undefined;
  report["max_rate"] = jnum(best);
  log << "sweep: " << kms.size() << " distances, max rate " << num(best) << '\n';
}

void optimize_mode(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  auto os = out.open("optimum.csv");
  write_optimum_header(os);
  Report rows = Report::array();
  for (double km : rc.distances_km) {
    const auto r = optimize(rc.search, rc.channel_at(km), rc.threads);
    write_optimum_row(os, km, r);
    rows.push_back({{"distance_km", jnum(km)},
                    {"mu", jnum(r.best.mu)},
                    {"tau", jnum(r.best.tau)},
                    {"nu1", jnum(r.best.nu1)},
                    {"nu2", jnum(r.best.nu2)},
                    {"rate", jnum(r.rate)},
                    {"positive", r.positive},
                    {"evaluations", r.evaluations}});
    log << "optimize: " << num(km) << " km rate " << num(r.rate) << " at mu " << num(r.best.mu) << " tau "
        << num(r.best.tau) << '\n';
  }
  out.close(os, "optimum.csv");
  report["objective"] = objective_id(rc.search.objective);
  report["photons"] = rc.search.photons;
  report["optima"] = rows;
}

struct DecoyComparison {
  bool ok = false;
  std::string status;
  TaggedBounds lp;
  TaggedBounds exact;
  double lp_rate = 0.0;
  double infinite_rate = 0.0;
};

void decoy_compare(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const auto& kms = rc.distances_km;
  const auto& p = rc.protocol;
  std::vector<DecoyComparison> res(kms.size());
  run_blocks(kms.size(), rc.threads, [&](std::size_t i) {
    const auto ch = rc.channel_at(kms[i]);
    auto& r = res[i];
    try {
      const auto table = make_yield_table(p, ch);
      r.lp = assemble_tagged_bounds(table, p.tau, p.mu, p.vacuum);
      r.exact = exact_tagged_bounds(p, ch);
      r.lp_rate = key_rate_with_decoy(table, p).raw;
      r.infinite_rate = infinite_decoy_key_rate(p, ch).raw;
      r.ok = true;
      r.status = "ok";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UndefinedRate) throw;
      r.status = "undefined_rate";
    }
  });
  auto bounds = out.open("decoy_bounds.csv");
  csv_row(bounds, {"distance_km", "quantity", "lp_lower", "lp_upper", "exact"});
  auto rates = out.open("decoy_rates.csv");
  csv_row(rates, {"distance_km", "lp_rate", "infinite_rate", "relative_gap", "status"});
  double worst = 0.0;
  for (std::size_t i = 0; i < kms.size(); ++i) {
    const auto& r = res[i];
    if (!r.ok) {
      csv_row(rates, {num(kms[i]), "", "", "", r.status});
      continue;
    }
    const std::pair<const char*, BoundPair TaggedBounds::*> fields[] = {
        {"q_star_0", &TaggedBounds::q_star_0}, {"q11", &TaggedBounds::q11}, {"q22", &TaggedBounds::q22},
        {"e11", &TaggedBounds::e11},           {"e22", &TaggedBounds::e22},
    };
    for (const auto& [name, field] : fields) {
      csv_row(bounds, {num(kms[i]), name, num((r.lp.*field).lower), num((r.lp.*field).upper),
                       num((r.exact.*field).lower)});
    }
    const double gap = r.infinite_rate != 0.0 ? std::abs(r.lp_rate - r.infinite_rate) / std::abs(r.infinite_rate)
                                              : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(gap)) worst = std::max(worst, gap);
    csv_row(rates, {num(kms[i]), num(r.lp_rate), num(r.infinite_rate), num(gap), r.status});
    log << "decoy-compare: " << num(kms[i]) << " km LP " << num(r.lp_rate) << " infinite " << num(r.infinite_rate)
        << '\n';
  }
  out.close(bounds, "decoy_bounds.csv");
  out.close(rates, "decoy_rates.csv");
  report["rows"] = kms.size();
  report["worst_relative_gap"] = jnum(worst);
}

std::vector<QuadratureRecord> sample_two_mode(const GaussianMode& m1, const GaussianMode& m2, std::size_t n,
                                              std::uint64_t seed, std::uint64_t stream_base, int threads) {
  std::vector<QuadratureRecord> recs(n);
  const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
  run_blocks(blocks, threads, [&](std::size_t b) {
    CounterRng rng(seed, stream_base + b);
    const std::size_t end = std::min(n, (b + 1) * kSampleBlock);
    for (std::size_t i = b * kSampleBlock; i < end; ++i) {
      auto& r = recs[i];
      r.phi1 = std::numbers::pi * rng.uniform();
      r.phi2 = std::numbers::pi * rng.uniform();
      r.q1 = sample_quadrature(m1, r.phi1, rng);
      r.q2 = sample_quadrature(m2, r.phi2, rng);
    }
  });
  return recs;
}

void tomo_verify(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const auto& t = rc.tomo;
  const KernelLattice lattice(t.eta_det, standard_kernel_specs());
  const auto m1 = detect({t.alpha1, t.xi}, t.eta_det);
  const auto m2 = detect({t.alpha2, t.xi}, t.eta_det);
  std::array<double, kAllObservables.size()> truth{};
  for (std::size_t k = 0; k < truth.size(); ++k) {
    truth[k] = product_state_expectation(t.alpha1, t.alpha2, t.xi, kAllObservables[k]);
  }
  std::array<int, kAllObservables.size()> within{};
  auto os = out.open("tomo_verify.csv");
  csv_row(os, {"trial", "observable", "truth", "estimate", "std_error", "z_score"});
  for (int trial = 0; trial < t.trials; ++trial) {
    const auto recs = sample_two_mode(m1, m2, t.samples, rc.seed, static_cast<std::uint64_t>(trial) << 32, rc.threads);
    const auto est = estimate_observables(recs, lattice);
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const double se = est[k].std_error_real;
      const double z = (est[k].value.real() - truth[k]) / se;
      within[k] += std::abs(z) <= 3.0;
      csv_row(os, {std::to_string(trial), std::string(observable_id(kAllObservables[k])), num(truth[k]),
                   num(est[k].value.real()), num(se), num(z)});
    }
  }
  out.close(os, "tomo_verify.csv");
  Report obs = Report::object();
  int worst = t.trials;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    obs[std::string(observable_id(kAllObservables[k]))] = {{"truth", jnum(truth[k])}, {"within_3se", within[k]}};
    worst = std::min(worst, within[k]);
  }
  report["samples"] = t.samples;
  report["trials"] = t.trials;
  report["observables"] = obs;
  report["min_trials_within_3se"] = worst;
  log << "tomo-verify: " << t.trials << " trials of " << t.samples << " samples, min within 3 SE " << worst << "/"
      << t.trials << '\n';
}

/// Simulates rounds block by block; `consume` sees each block in order on the calling thread.
template <class Consume>
void stream_rounds(const RunConfig& rc, Consume&& consume) {
  const RoundSimulator sim(rc.protocol, rc.channel, rc.settings, rc.seed);
  const std::size_t total = rc.rounds;
  const std::size_t blocks = (total + kRoundBlock - 1) / kRoundBlock;
  const std::size_t chunk = static_cast<std::size_t>(rc.threads);
  for (std::size_t first = 0; first < blocks; first += chunk) {
    const std::size_t count = std::min(chunk, blocks - first);
    std::vector<std::vector<RoundRecord>> parts(count);
    run_blocks(count, rc.threads, [&](std::size_t i) { parts[i] = sim.block(first + i, total); });
    for (const auto& part : parts) consume(part);
  }
}

struct KeyTally {
  double rounds = 0, accepted = 0, errors = 0;
  void add(const RoundRecord& r, double tau) {
    if (r.intensity != 0 || r.alice_basis != AliceBasis::Z || r.bob_basis != BobBasis::Key) return;
    ++rounds;
    const int bit = decode_key_bit(r.q1, r.q2, tau);
    if (bit < 0) return;
    ++accepted;
    errors += bit != r.key_bit;
  }
};

void simulate(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const bool csv = rc.round_format == RoundFormat::Csv;
  const std::string name = csv ? "rounds.csv" : "rounds.bin";
  auto os = out.open(name, !csv);
  KeyTally tally;
  if (csv) {
    write_round_header_csv(os);
  } else {
    write_round_header_binary(os);
  }
  stream_rounds(rc, [&](const std::vector<RoundRecord>& part) {
    if (csv) {
      write_rounds_csv(os, part);
    } else {
      write_rounds_binary(os, part);
    }
    if (!os) fail(ErrorKind::Io, "write failed for '" + name + "'");
    for (const auto& r : part) tally.add(r, rc.protocol.tau);
  });
  out.close(os, name);
  const auto z = z_gain_and_error(rc.protocol.mu, rc.channel.transmittance(), rc.channel.excess_noise_xi,
                                  rc.protocol.tau);
  report["rounds"] = rc.rounds;
  report["format"] = csv ? "csv" : "binary";
  report["signal_key_rounds"] = static_cast<std::uint64_t>(tally.rounds);
  report["accepted"] = static_cast<std::uint64_t>(tally.accepted);
  report["errors"] = static_cast<std::uint64_t>(tally.errors);
  if (tally.rounds > 0 && tally.accepted > 0) {
    const double q = tally.accepted / tally.rounds;
    const double e = tally.errors / tally.accepted;
    report["q_z"] = {{"empirical", jnum(q)},
                     {"closed_form", jnum(z.q_z)},
                     {"sigmas", jnum((q - z.q_z) / std::sqrt(z.q_z * (1 - z.q_z) / tally.rounds))}};
    report["e_z"] = {{"empirical", jnum(e)},
                     {"closed_form", jnum(z.e_z)},
                     {"sigmas", jnum((e - z.e_z) / std::sqrt(z.e_z * (1 - z.e_z) / tally.accepted))}};
  }
  log << "simulate: " << rc.rounds << " rounds written to " << name << '\n';
}

void finite_size(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log) {
  const auto& p = rc.protocol;
  const KernelLattice lattice(1.0, standard_kernel_specs());
  RoundAccumulator acc(p.tau, lattice);
  stream_rounds(rc, [&](const std::vector<RoundRecord>& part) { acc.add(part); });
  const auto kb = standard_kernel_bounds(1.0);
  const auto b = finite_tagged_bounds(acc, rc.settings, p, kb, rc.finite);
  const auto table = make_yield_table(p, rc.channel);
  const auto exact = exact_tagged_bounds(p, rc.channel);
  const double asym = key_rate_with_decoy(table, p).raw;
  const std::map<int, double> eps_pa{{1, rc.epsilon_pa}, {2, rc.epsilon_pa}};

  const double vac = acc.tag_count(0, VirtualTag::Vacuum);
  const double one = acc.tag_count(0, VirtualTag::One), one_err = acc.tag_count(0, VirtualTag::OneError);
  const double two = acc.tag_count(0, VirtualTag::Two), two_err = acc.tag_count(0, VirtualTag::TwoError);
  const double realized[] = {vac, one + one_err, two + two_err, one + one_err > 0 ? one_err / (one + one_err) : 0.0,
                             two + two_err > 0 ? two_err / (two + two_err) : 0.0};
  const std::pair<const char*, BoundPair TaggedBounds::*> fields[] = {
      {"q_star_0", &TaggedBounds::q_star_0}, {"q11", &TaggedBounds::q11}, {"q22", &TaggedBounds::q22},
      {"e11", &TaggedBounds::e11},           {"e22", &TaggedBounds::e22},
  };
  auto bs = out.open("finite_bounds.csv");
  csv_row(bs, {"quantity", "count_lower", "count_upper", "realized", "per_round_lower", "per_round_upper",
               "asymptotic"});
  for (std::size_t i = 0; i < std::size(fields); ++i) {
    const auto& [name, field] = fields[i];
    csv_row(bs, {name, num((b.counts.*field).lower), num((b.counts.*field).upper), num(realized[i]),
                 num((b.per_round.*field).lower), num((b.per_round.*field).upper), num((exact.*field).lower)});
  }
  out.close(bs, "finite_bounds.csv");

  const double length = finite_key_length(b.key_rounds, key_stats_from(b.per_round), eps_pa, p.f, b.key_map.q_z,
                                          b.key_map.e_z);
  const double rate = b.key_rounds > 0 ? length / b.key_rounds : 0.0;
  auto ks = out.open("finite_key.csv");
  csv_row(ks, {"rounds", "signal_key_rounds", "q_z", "e_z", "key_length_bits", "rate_per_key_round",
               "asymptotic_rate"});
  csv_row(ks, {std::to_string(rc.rounds), num(b.key_rounds), num(b.key_map.q_z), num(b.key_map.e_z), num(length),
               num(rate), num(asym)});
  out.close(ks, "finite_key.csv");

  Report conv = Report::array();
  if (!rc.expected_rounds.empty()) {
    const auto model = YieldModel::from(rc.channel);
    const auto mus = p.intensities();
    auto cs = out.open("finite_convergence.csv");
    csv_row(cs, {"expected_rounds", "rate_per_key_round", "asymptotic_rate", "gap"});
    for (double n : rc.expected_rounds) {
      const auto sums = [&](int a, SourceConfig cfg, Observable obs) {
        return n * rc.settings.round_probability(a, cfg, BobBasis::Tomography) * observed_yield(cfg, mus[a], obs, model);
      };
      const auto e = finite_tagged_from_sums(sums, n, rc.settings, p, kb, rc.finite);
      const double r = finite_key_length(e.key_rounds, key_stats_from(e.per_round), eps_pa, p.f,
                                         table.key_map->q_z, table.key_map->e_z) /
                       e.key_rounds;
      csv_row(cs, {num(n), num(r), num(asym), num(std::abs(r - asym))});
      conv.push_back({{"expected_rounds", jnum(n)}, {"rate_per_key_round", jnum(r)}});
    }
    out.close(cs, "finite_convergence.csv");
  }
  report["rounds"] = rc.rounds;
  report["signal_key_rounds"] = jnum(b.key_rounds);
  report["epsilon_total"] = jnum(rc.finite.epsilon_total);
  report["epsilon_each"] = jnum(b.epsilon_each);
  report["azuma_applications"] = b.applications;
  report["key_length_bits"] = jnum(length);
  report["rate_per_key_round"] = jnum(rate);
  report["asymptotic_rate"] = jnum(asym);
  if (!conv.empty()) report["convergence"] = conv;
  log << "finite-size: " << rc.rounds << " rounds, key length " << num(length) << " bits, rate "
      << num(rate) << " per signal key round (asymptotic " << num(asym) << ")\n";
}

}  // namespace

std::vector<Artifact> run(const RunConfig& rc, std::ostream& log) {
  ArtifactSet out(rc.out_dir);
  Report report;
  report["command"] = mode_id(rc.mode);
  if (rc.target) report["target"] = target_id(*rc.target);
  report["seed"] = std::to_string(rc.seed);
  switch (rc.mode) {
    case Mode::Sweep:
      sweep(rc, out, report, log);
      break;
    case Mode::Optimize:
      optimize_mode(rc, out, report, log);
      break;
    case Mode::DecoyCompare:
      decoy_compare(rc, out, report, log);
      break;
    case Mode::TomoVerify:
      tomo_verify(rc, out, report, log);
      break;
    case Mode::FiniteSize:
      finite_size(rc, out, report, log);
      break;
    case Mode::Simulate:
      simulate(rc, out, report, log);
      break;
    case Mode::Reproduce:
      reproduce(rc, out, report, log);
      break;
  }
  write_report(out, report);
  const auto artifacts = out.hashes();
  write_manifest(rc, artifacts);
  return artifacts;
}

}  // namespace tbcv::cli
