#include "cli/run_config.hpp"

#include <cmath>
#include <numbers>

#include "tbcv/error.hpp"

namespace tbcv::cli {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct ModeName {
  Mode mode;
  const char* id;
};

constexpr ModeName kModes[] = {
    {Mode::Sweep, "sweep"},           {Mode::Optimize, "optimize"},
    {Mode::DecoyCompare, "decoy-compare"}, {Mode::TomoVerify, "tomo-verify"},
    {Mode::FiniteSize, "finite-size"}, {Mode::Simulate, "simulate"},
    {Mode::Reproduce, "reproduce"},
};

struct TargetName {
  Target target;
  const char* id;
};

constexpr TargetName kTargets[] = {
    {Target::Fig3a, "fig3a"}, {Target::Fig3b, "fig3b"}, {Target::Fig5a, "fig5a"},
    {Target::Fig5b, "fig5b"}, {Target::Fig5c, "fig5c"}, {Target::Table3, "table3"},
    {Target::Table5, "table5"},
};

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::Config, what);
}

void read_channel(const KeyValueConfig& kv, ChannelParams& ch) {
  if (auto v = kv.get_double("attenuation_db_per_km")) ch.attenuation_db_per_km = *v;
  if (auto v = kv.get_double("detector_efficiency")) ch.detector_efficiency = *v;
  if (auto v = kv.get_double("excess_noise_snu")) ch.excess_noise_xi = *v;
  if (auto v = kv.get_double("misalignment_deg")) ch.misalignment_delta = *v * kDeg;
  if (auto v = kv.get_int("thermal_cutoff_photons")) ch.cutoff_Nc = static_cast<int>(*v);
  require(ch.attenuation_db_per_km >= 0.0, "attenuation_db_per_km must be >= 0");
}

std::vector<double> read_distances(const KeyValueConfig& kv, bool required) {
  const auto list = kv.get_list("distances_km");
  const auto start = kv.get_double("distance_start_km");
  const auto stop = kv.get_double("distance_stop_km");
  const auto step = kv.get_double("distance_step_km");
  const bool range = start || stop || step;
  require(!(list && range), "give either distances_km or distance_start_km/stop/step, not both");
  std::vector<double> out;
  if (list) {
    out = *list;
  } else if (range) {
    require(start && stop && step, "distance range needs distance_start_km, distance_stop_km and distance_step_km");
    require(*step > 0.0 && *stop >= *start, "distance range must have step > 0 and stop >= start");
    const auto n = static_cast<long>(std::floor((*stop - *start) / *step + 1e-9));
    require(n < 100000, "distance range has too many points");
    for (long k = 0; k <= n; ++k) out.push_back(*start + *step * static_cast<double>(k));
  } else if (required) {
    fail(ErrorKind::Config, "missing distances: set distances_km or distance_start_km/stop/step");
  }
  for (double d : out) require(d >= 0.0, "distances must be >= 0");
  return out;
}

double read_single_distance(const KeyValueConfig& kv) {
  const double d = kv.require_double("distance_km");
  require(d >= 0.0, "distance_km must be >= 0");
  return d;
}

VacuumFactor parse_vacuum(const std::string& id) {
  if (id == "consistent") return VacuumFactor::Consistent;
  if (id == "verbatim") return VacuumFactor::PrintedIntegrand;
  fail(ErrorKind::Config, "vacuum_factor must be 'consistent' or 'verbatim'");
}

struct ProtocolNeeds {
  bool signal = true;
  bool decoys = false;
};

void read_protocol(const KeyValueConfig& kv, ProtocolParams& p, ProtocolNeeds needs) {
  if (needs.signal) {
    p.mu = kv.require_double("signal_mean_photons");
    p.tau = kv.require_double("threshold_vacuum_std");
    require(p.mu > 0.0, "signal_mean_photons must be > 0");
    require(p.tau > 0.0, "threshold_vacuum_std must be > 0");
  }
  if (needs.decoys) {
    p.nu1 = kv.require_double("decoy1_mean_photons");
    p.nu2 = kv.require_double("decoy2_mean_photons");
    require(p.nu2 > 0.0 && p.nu2 < p.nu1 && p.nu1 < p.mu,
            "decoy intensities must satisfy 0 < decoy2 < decoy1 < signal");
  }
  if (auto v = kv.get_double("reconciliation_efficiency")) p.f = *v;
  if (auto v = kv.get_string("vacuum_factor")) p.vacuum = parse_vacuum(*v);
  require(p.f >= 1.0, "reconciliation_efficiency must be >= 1");
}

void read_settings(const KeyValueConfig& kv, SimulationSettings& s) {
  if (auto v = kv.get_list("intensity_probabilities")) {
    require(v->size() == static_cast<std::size_t>(kIntensityLevels),
            "intensity_probabilities needs 4 values (signal, decoy1, decoy2, vacuum)");
    for (int a = 0; a < kIntensityLevels; ++a) s.intensity_probs[a] = (*v)[a];
  }
  if (auto v = kv.get_double("p_alice_z")) s.p_alice_z = *v;
  if (auto v = kv.get_double("p_bob_key")) s.p_bob_key = *v;
  s.validate();
}

std::uint64_t read_rounds(const KeyValueConfig& kv, bool allow_zero) {
  const auto v = kv.get_int("rounds");
  require(v.has_value(), "missing required key 'rounds'");
  require(*v >= (allow_zero ? 0 : 1), allow_zero ? "rounds must be >= 0" : "rounds must be >= 1");
  return static_cast<std::uint64_t>(*v);
}

void read_search(const KeyValueConfig& kv, SearchSpace& s) {
  const auto objective = kv.get_string("objective");
  const Objective o = objective ? parse_objective(*objective) : Objective::IdealPhotons;
  int photons = 2;
  if (auto v = kv.get_int("tagged_photons_max")) photons = static_cast<int>(*v);
  require(o == Objective::IdealPhotons || photons == 2,
          "tagged_photons_max applies to the ideal objective only");
  require(photons >= 1 && photons <= kMaxTaggedPhotons, "tagged_photons_max must lie in 1..6");
  s = default_search_space(o, photons);
  if (auto v = kv.get_list("signal_grid_mean_photons")) s.mu = *v;
  if (auto v = kv.get_list("threshold_grid_vacuum_std")) s.tau = *v;
  if (auto v = kv.get_list("decoy1_grid_mean_photons")) s.nu1 = *v;
  if (auto v = kv.get_list("decoy2_grid_mean_photons")) s.nu2 = *v;
  if (auto v = kv.get_double("reconciliation_efficiency")) s.f = *v;
  if (auto v = kv.get_string("vacuum_factor")) s.vacuum = parse_vacuum(*v);
  if (auto v = kv.get_int("refine_sweeps")) s.refine_sweeps = static_cast<int>(*v);
  s.validate();
}

void read_finite(const KeyValueConfig& kv, RunConfig& rc) {
  if (auto v = kv.get_double("epsilon_total")) rc.finite.epsilon_total = *v;
  if (auto v = kv.get_double("epsilon_privacy_amplification")) rc.epsilon_pa = *v;
  require(rc.finite.epsilon_total > 0.0 && rc.finite.epsilon_total < 1.0, "epsilon_total must lie in (0, 1)");
  require(rc.epsilon_pa > 0.0 && rc.epsilon_pa < 1.0, "epsilon_privacy_amplification must lie in (0, 1)");
  if (auto v = kv.get_list("expected_rounds_grid")) {
    for (double n : *v) require(n >= 1.0, "expected_rounds_grid entries must be >= 1");
    rc.expected_rounds = *v;
  }
}

void read_tomo(const KeyValueConfig& kv, TomoSetup& t) {
  auto get = [&](const char* key) { return kv.get_double(key).value_or(0.0); };
  t.alpha1 = {get("mode1_amplitude_re"), get("mode1_amplitude_im")};
  t.alpha2 = {get("mode2_amplitude_re"), get("mode2_amplitude_im")};
  t.xi = get("state_excess_noise_snu");
  if (auto v = kv.get_double("detector_efficiency")) t.eta_det = *v;
  const auto samples = kv.get_int("samples");
  require(samples.has_value(), "missing required key 'samples'");
  require(*samples >= 1, "samples must be >= 1");
  t.samples = static_cast<std::uint64_t>(*samples);
  if (auto v = kv.get_int("trials")) t.trials = static_cast<int>(*v);
  require(t.trials >= 1 && t.trials <= 100000, "trials must lie in 1..100000");
  require(t.xi >= 0.0, "state_excess_noise_snu must be >= 0");
  require(t.eta_det > 0.5 && t.eta_det <= 1.0, "detector_efficiency must lie in (0.5, 1] for tomography");
}

// Every channel the run will build must be a valid thermal-loss channel.
void validate_channels(const RunConfig& rc) {
  std::vector<double> kms = rc.distances_km;
  if (kms.empty()) kms.push_back(rc.channel.distance_km);
  for (double km : kms) {
    const auto ch = rc.channel_at(km);
    ch.validate();
    ch.thermal_mean();
  }
}

}  // namespace

std::string mode_id(Mode m) {
  for (const auto& e : kModes) {
    if (e.mode == m) return e.id;
  }
  return "?";
}

Mode parse_mode(const std::string& id) {
  for (const auto& e : kModes) {
    if (id == e.id) return e.mode;
  }
  fail(ErrorKind::Config, "unknown mode '" + id + "'");
}

std::string target_id(Target t) {
  for (const auto& e : kTargets) {
    if (e.target == t) return e.id;
  }
  return "?";
}

Target parse_target(const std::string& id) {
  for (const auto& e : kTargets) {
    if (id == e.id) return e.target;
  }
  fail(ErrorKind::Config, "unknown target '" + id + "'");
}

const std::vector<std::string>& target_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& e : kTargets) v.emplace_back(e.id);
    return v;
  }();
  return ids;
}

ChannelParams RunConfig::channel_at(double km) const {
  ChannelParams ch = channel;
  ch.distance_km = km;
  return ch;
}

RunConfig build_run_config(Mode mode, std::optional<Target> target, const KeyValueConfig& kv,
                           std::uint64_t seed, int threads, const std::string& out_dir) {
  require(threads >= 1 && threads <= 1024, "threads must lie in 1..1024");
  require(!out_dir.empty(), "output directory must not be empty");
  require((mode == Mode::Reproduce) == target.has_value(), "a target is given exactly for reproduce");
  RunConfig rc;
  rc.mode = mode;
  rc.target = target;
  rc.seed = seed;
  rc.threads = threads;
  rc.out_dir = out_dir;
  rc.source = KeyValueConfig::from_entries(kv.entries());
  const auto& in = rc.source;

  switch (mode) {
    case Mode::Sweep: {
      read_channel(in, rc.channel);
      rc.distances_km = read_distances(in, true);
      const auto objective = in.get_string("objective");
      rc.search.objective = objective ? parse_objective(*objective) : Objective::IdealPhotons;
      if (auto v = in.get_int("tagged_photons_max")) rc.search.photons = static_cast<int>(*v);
      require(rc.search.objective == Objective::IdealPhotons || rc.search.photons == 2,
              "tagged_photons_max applies to the ideal objective only");
      read_protocol(in, rc.protocol, {true, rc.search.objective == Objective::Decoy});
      rc.search.mu = {rc.protocol.mu};
      rc.search.tau = {rc.protocol.tau};
      rc.search.nu1 = {rc.protocol.nu1};
      rc.search.nu2 = {rc.protocol.nu2};
      rc.search.f = rc.protocol.f;
      rc.search.vacuum = rc.protocol.vacuum;
      rc.search.validate();
      break;
    }
    case Mode::Optimize:
      read_channel(in, rc.channel);
      rc.distances_km = read_distances(in, true);
      read_search(in, rc.search);
      break;
    case Mode::DecoyCompare:
      read_channel(in, rc.channel);
      rc.distances_km = read_distances(in, true);
      read_protocol(in, rc.protocol, {true, true});
      break;
    case Mode::TomoVerify:
      read_tomo(in, rc.tomo);
      break;
    case Mode::FiniteSize:
      read_channel(in, rc.channel);
      rc.channel.distance_km = read_single_distance(in);
      read_protocol(in, rc.protocol, {true, true});
      read_settings(in, rc.settings);
      rc.rounds = read_rounds(in, false);
      read_finite(in, rc);
      break;
    case Mode::Simulate: {
      read_channel(in, rc.channel);
      rc.channel.distance_km = read_single_distance(in);
      read_protocol(in, rc.protocol, {true, true});
      read_settings(in, rc.settings);
      rc.rounds = read_rounds(in, true);
      const auto format = in.get_string("output_format").value_or("csv");
      require(format == "csv" || format == "binary", "output_format must be 'csv' or 'binary'");
      rc.round_format = format == "csv" ? RoundFormat::Csv : RoundFormat::Binary;
      break;
    }
    case Mode::Reproduce: {
      const Target t = *target;
      if (t == Target::Fig3a || t == Target::Fig5a || t == Target::Fig5b || t == Target::Table5) {
        rc.distances_km = read_distances(in, false);
      }
      if (t == Target::Fig5a) {
        if (auto v = in.get_list("excess_noise_grid_snu")) {
          for (double x : *v) require(x >= 0.0, "excess_noise_grid_snu entries must be >= 0");
          rc.excess_noise_grid_snu = *v;
        }
      }
      if (t == Target::Fig5b) {
        if (auto v = in.get_list("misalignment_grid_deg")) rc.misalignment_grid_deg = *v;
      }
      break;
    }
  }
  in.reject_unused();
  if (mode != Mode::TomoVerify && mode != Mode::Reproduce) validate_channels(rc);
  return rc;
}

}  // namespace tbcv::cli
