#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "tbcv/channel.hpp"
#include "tbcv/decoy.hpp"
#include "tbcv/finite_size.hpp"
#include "tbcv/optimizer.hpp"
#include "tbcv/rounds.hpp"

namespace tbcv::cli {

enum class Mode { Sweep, Optimize, DecoyCompare, TomoVerify, FiniteSize, Simulate, Reproduce };

std::string mode_id(Mode m);
Mode parse_mode(const std::string& id);

enum class Target { Fig3a, Fig3b, Fig5a, Fig5b, Fig5c, Table3, Table5 };

std::string target_id(Target t);
Target parse_target(const std::string& id);
const std::vector<std::string>& target_ids();

struct TomoSetup {
  std::complex<double> alpha1{0.0, 0.0};
  std::complex<double> alpha2{0.0, 0.0};
  double xi = 0.0;
  double eta_det = 1.0;
  std::uint64_t samples = 0;
  int trials = 1;
};

enum class RoundFormat { Csv, Binary };

/// Everything a run needs, validated before any compute.
struct RunConfig {
  Mode mode = Mode::Sweep;
  std::optional<Target> target;
  ChannelParams channel;
  std::vector<double> distances_km;
  ProtocolParams protocol;
  SearchSpace search;
  SimulationSettings settings;
  FiniteOptions finite;
  double epsilon_pa = 1e-10;
  std::uint64_t rounds = 0;
  std::vector<double> expected_rounds;
  RoundFormat round_format = RoundFormat::Csv;
  TomoSetup tomo;
  std::vector<double> excess_noise_grid_snu;
  std::vector<double> misalignment_grid_deg;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  KeyValueConfig source;

  ChannelParams channel_at(double km) const;
};

/// Reads the keys that apply to the mode, rejects the rest and validates the result.
RunConfig build_run_config(Mode mode, std::optional<Target> target, const KeyValueConfig& kv,
                           std::uint64_t seed, int threads, const std::string& out_dir);

}  // namespace tbcv::cli
