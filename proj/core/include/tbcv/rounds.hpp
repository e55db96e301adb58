#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tbcv/channel.hpp"
#include "tbcv/decoy.hpp"

namespace tbcv {

enum class AliceBasis : std::uint8_t { Z = 0, X = 1 };
enum class BobBasis : std::uint8_t { Key = 0, Tomography = 1 };

/// Virtual photon-number tag of a key round (Alice Z, Bob key map).
enum class VirtualTag : std::uint8_t {
  None = 0,
  Vacuum = 1,       // counts toward Q*0
  One = 2,          // counts toward Q11
  OneError = 3,     // counts toward Q11 and e11 Q11
  Two = 4,          // counts toward Q22
  TwoError = 5,     // counts toward Q22 and e22 Q22
};

inline constexpr int kIntensityLevels = 4;

struct RoundRecord {
  std::uint8_t intensity = 0;  // index into ProtocolParams::intensities(): mu, nu1, nu2, 0
  AliceBasis alice_basis = AliceBasis::Z;
  std::uint8_t key_bit = 0;      // Z basis: 0 puts the pulse in the first bin
  std::uint8_t phase_index = 0;  // X basis: relative phase k * 90 degrees
  BobBasis bob_basis = BobBasis::Key;
  VirtualTag tag = VirtualTag::None;
  double phi1 = 0.0;  // LO phases in [0, pi); equal in key rounds
  double phi2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;

  SourceConfig config() const;
};

struct SimulationSettings {
  std::array<double, kIntensityLevels> intensity_probs{0.7, 0.1, 0.1, 0.1};
  double p_alice_z = 0.5;
  double p_bob_key = 0.5;

  void validate() const;
  /// Probability that a round has intensity a, source configuration cfg and the given Bob basis.
  double round_probability(int a, SourceConfig cfg, BobBasis bob) const;
};

/// Bob's key map: accept when exactly one bin lies outside (-tau, tau); the bit names that bin.
/// Returns -1 when rejected.
int decode_key_bit(double q1, double q2, double tau);

/// Per-intensity probabilities of the virtual tags in key rounds, indexed by VirtualTag.
std::array<double, 6> virtual_tag_probabilities(double intensity, const ProtocolParams& protocol,
                                                const ChannelParams& channel);

/// Deterministic simulation of rounds [first, first + count) over an honest thermal channel.
/// Round i draws from stream i / kRoundBlock of the seed, so any split reproduces the same records.
inline constexpr std::size_t kRoundBlock = std::size_t{1} << 16;

class RoundSimulator {
 public:
  RoundSimulator(const ProtocolParams& protocol, const ChannelParams& channel,
                 const SimulationSettings& settings, std::uint64_t seed);

  /// Records of block b (rounds b * kRoundBlock up to count total rounds).
  std::vector<RoundRecord> block(std::size_t b, std::size_t total) const;
  std::vector<RoundRecord> simulate(std::size_t total, int threads = 1) const;

 private:
  ProtocolParams protocol_;
  ChannelParams channel_;
  SimulationSettings settings_;
  std::uint64_t seed_;
  std::array<std::array<double, 6>, kIntensityLevels> tag_cdf_{};
};

/// CSV columns: intensity,alice_basis,key_bit,phase_index,bob_basis,tag,phi1,q1,phi2,q2
/// (bases as Z/X and key/tomo, tag as an integer code of VirtualTag, reals with 17 digits).
void write_round_header_csv(std::ostream& os);
void write_rounds_csv(std::ostream& os, const std::vector<RoundRecord>& records);
std::vector<RoundRecord> read_rounds_csv(std::istream& is);

/// Binary stream: magic "TBCVRND1", then packed little-endian records of 6 bytes + 4 doubles.
void write_round_header_binary(std::ostream& os);
void write_rounds_binary(std::ostream& os, const std::vector<RoundRecord>& records);
std::vector<RoundRecord> read_rounds_binary(std::istream& is);

}  // namespace tbcv
