#include "tbcv/rounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "tbcv/parallel.hpp"
#include "tbcv/rng.hpp"
#include "tbcv/yields.hpp"

namespace tbcv {

namespace {

constexpr char kRoundMagic[8] = {'T', 'B', 'C', 'V', 'R', 'N', 'D', '1'};
constexpr const char* kRoundHeader = "intensity,alice_basis,key_bit,phase_index,bob_basis,tag,phi1,q1,phi2,q2";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

}  // namespace

SourceConfig RoundRecord::config() const {
  if (alice_basis == AliceBasis::Z) return SourceConfig::Z;
  return kAllConfigs[1 + (phase_index & 3)];
}

void SimulationSettings::validate() const {
  double total = 0.0;
  for (double p : intensity_probs) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Config, "intensity probabilities must lie in [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::Config, "intensity probabilities must sum to 1");
  if (!(p_alice_z >= 0.0 && p_alice_z <= 1.0)) fail(ErrorKind::Config, "p_alice_z must lie in [0, 1]");
  if (!(p_bob_key >= 0.0 && p_bob_key <= 1.0)) fail(ErrorKind::Config, "p_bob_key must lie in [0, 1]");
}

double SimulationSettings::round_probability(int a, SourceConfig cfg, BobBasis bob) const {
  if (a < 0 || a >= kIntensityLevels) fail(ErrorKind::Domain, "intensity index out of range");
  const double pa = intensity_probs[a];
  const double pc = cfg == SourceConfig::Z ? p_alice_z : 0.25 * (1.0 - p_alice_z);
  const double pb = bob == BobBasis::Key ? p_bob_key : 1.0 - p_bob_key;
  return pa * pc * pb;
}

int decode_key_bit(double q1, double q2, double tau) {
  const bool out1 = std::abs(q1) > tau;
  const bool out2 = std::abs(q2) > tau;
  if (out1 == out2) return -1;
  return out1 ? 0 : 1;
}

std::array<double, 6> virtual_tag_probabilities(double intensity, const ProtocolParams& protocol,
                                                const ChannelParams& channel) {
  std::array<double, 6> p{};
  if (intensity == 0.0) {
    const auto rc = region_coefficients(protocol.tau, protocol.vacuum);
    const double vac = rc.vac_accept *
                       observed_yield(SourceConfig::Z, 0.0, Observable::P00, YieldModel::from(channel));
    p[static_cast<int>(VirtualTag::Vacuum)] = vac;
    p[static_cast<int>(VirtualTag::None)] = 1.0 - vac;
    return p;
  }
  ProtocolParams at = protocol;
  at.mu = intensity;
  const auto b = exact_tagged_bounds(at, channel);
  p[static_cast<int>(VirtualTag::Vacuum)] = b.q_star_0.lower;
  p[static_cast<int>(VirtualTag::OneError)] = b.err11.lower;
  p[static_cast<int>(VirtualTag::One)] = b.q11.lower - b.err11.lower;
  p[static_cast<int>(VirtualTag::TwoError)] = b.err22.lower;
  p[static_cast<int>(VirtualTag::Two)] = b.q22.lower - b.err22.lower;
  double used = 0.0;
  for (int k = 1; k < 6; ++k) {
    if (p[k] < 0.0) fail(ErrorKind::Inconsistent, "virtual tag probability below zero");
    used += p[k];
  }
  if (used > 1.0 + 1e-12) fail(ErrorKind::Inconsistent, "virtual tag probabilities exceed one");
  p[0] = std::max(0.0, 1.0 - used);
  return p;
}

RoundSimulator::RoundSimulator(const ProtocolParams& protocol, const ChannelParams& channel,
                               const SimulationSettings& settings, std::uint64_t seed)
    : protocol_(protocol), channel_(channel), settings_(settings), seed_(seed) {
  settings_.validate();
  channel_.validate();
  const auto mus = protocol_.intensities();
  for (int a = 0; a < kIntensityLevels; ++a) {
    const auto p = virtual_tag_probabilities(mus[a], protocol_, channel_);
    double acc = 0.0;
    for (int k = 0; k < 6; ++k) {
      acc += p[k];
      tag_cdf_[a][k] = acc;
    }
    tag_cdf_[a][5] = 1.0;
  }
}

std::vector<RoundRecord> RoundSimulator::block(std::size_t b, std::size_t total) const {
  const std::size_t begin = b * kRoundBlock;
  if (begin >= total) return {};
  const std::size_t end = std::min(total, begin + kRoundBlock);
  CounterRng rng(seed_, b);
  std::normal_distribution<double> normal;
  const auto model = YieldModel::from(channel_);
  const auto mus = protocol_.intensities();
  const double pi = std::numbers::pi;
  const double noise = std::sqrt(1.0 + model.xi);

  std::vector<RoundRecord> out(end - begin);
  for (auto& r : out) {
    double u = rng.uniform();
    int a = 0;
    double cdf = settings_.intensity_probs[0];
    while (a + 1 < kIntensityLevels && u >= cdf) cdf += settings_.intensity_probs[++a];
    r.intensity = static_cast<std::uint8_t>(a);

    const double theta = 2.0 * pi * rng.uniform();
    std::complex<double> a1;
    std::complex<double> a2;
    if (rng.uniform() < settings_.p_alice_z) {
      r.alice_basis = AliceBasis::Z;
      r.key_bit = rng.uniform() < 0.5 ? 0 : 1;
      const auto bright = std::polar(std::sqrt(model.eta * mus[a]), theta);
      (r.key_bit == 0 ? a1 : a2) = bright;
    } else {
      r.alice_basis = AliceBasis::X;
      r.phase_index = static_cast<std::uint8_t>(std::min(3.0, std::floor(4.0 * rng.uniform())));
      const double amp = std::sqrt(0.5 * model.eta * mus[a]);
      a1 = std::polar(amp, theta);
      a2 = std::polar(amp, theta + 0.5 * pi * r.phase_index + model.delta);
    }

    if (rng.uniform() < settings_.p_bob_key) {
      r.bob_basis = BobBasis::Key;
      r.phi1 = pi * rng.uniform();
      r.phi2 = r.phi1;
    } else {
      r.bob_basis = BobBasis::Tomography;
      r.phi1 = pi * rng.uniform();
      r.phi2 = pi * rng.uniform();
    }
    r.q1 = 2.0 * std::real(a1 * std::polar(1.0, -r.phi1)) + noise * normal(rng);
    r.q2 = 2.0 * std::real(a2 * std::polar(1.0, -r.phi2)) + noise * normal(rng);

    if (r.alice_basis == AliceBasis::Z && r.bob_basis == BobBasis::Key) {
      const double v = rng.uniform();
      int k = 0;
      while (k < 5 && v >= tag_cdf_[a][k]) ++k;
      r.tag = static_cast<VirtualTag>(k);
    }
  }
  return out;
}

std::vector<RoundRecord> RoundSimulator::simulate(std::size_t total, int threads) const {
  const std::size_t blocks = (total + kRoundBlock - 1) / kRoundBlock;
  std::vector<std::vector<RoundRecord>> parts(blocks);
  run_blocks(blocks, threads, [&](std::size_t b) { parts[b] = block(b, total); });
  std::vector<RoundRecord> out;
  out.reserve(total);
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

void write_round_header_csv(std::ostream& os) { os << kRoundHeader << '\n'; }

void write_rounds_csv(std::ostream& os, const std::vector<RoundRecord>& records) {
  for (const auto& r : records) {
    os << static_cast<int>(r.intensity) << ',' << (r.alice_basis == AliceBasis::Z ? 'Z' : 'X') << ','
       << static_cast<int>(r.key_bit) << ',' << static_cast<int>(r.phase_index) << ','
       << (r.bob_basis == BobBasis::Key ? "key" : "tomo") << ',' << static_cast<int>(r.tag) << ','
       << fmt17(r.phi1) << ',' << fmt17(r.q1) << ',' << fmt17(r.phi2) << ',' << fmt17(r.q2) << '\n';
  }
  if (!os) fail(ErrorKind::Io, "round records: write failed");
}

std::vector<RoundRecord> read_rounds_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRoundHeader) {
    fail(ErrorKind::Io, "round records: missing header");
  }
  std::vector<RoundRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const std::string where = "round records line " + std::to_string(lineno);
    if (f.size() != 10) fail(ErrorKind::Io, where + ": expected 10 fields");
    auto num = [&](const std::string& s) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        fail(ErrorKind::Io, where + ": bad number '" + s + "'");
      }
    };
    auto small = [&](const std::string& s, int hi) {
      const double v = num(s);
      if (v != std::floor(v) || v < 0 || v > hi) fail(ErrorKind::Io, where + ": field out of range");
      return static_cast<std::uint8_t>(v);
    };
    RoundRecord r;
    r.intensity = small(f[0], kIntensityLevels - 1);
    if (f[1] != "Z" && f[1] != "X") fail(ErrorKind::Io, where + ": alice_basis must be Z or X");
    r.alice_basis = f[1] == "Z" ? AliceBasis::Z : AliceBasis::X;
    r.key_bit = small(f[2], 1);
    r.phase_index = small(f[3], 3);
    if (f[4] != "key" && f[4] != "tomo") fail(ErrorKind::Io, where + ": bob_basis must be key or tomo");
    r.bob_basis = f[4] == "key" ? BobBasis::Key : BobBasis::Tomography;
    r.tag = static_cast<VirtualTag>(small(f[5], 5));
    r.phi1 = num(f[6]);
    r.q1 = num(f[7]);
    r.phi2 = num(f[8]);
    r.q2 = num(f[9]);
    out.push_back(r);
  }
  return out;
}

void write_round_header_binary(std::ostream& os) { os.write(kRoundMagic, sizeof kRoundMagic); }

void write_rounds_binary(std::ostream& os, const std::vector<RoundRecord>& records) {
  for (const auto& r : records) {
    const std::uint8_t bytes[6] = {r.intensity,
                                   static_cast<std::uint8_t>(r.alice_basis),
                                   r.key_bit,
                                   r.phase_index,
                                   static_cast<std::uint8_t>(r.bob_basis),
                                   static_cast<std::uint8_t>(r.tag)};
    os.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
    put(os, r.phi1);
    put(os, r.q1);
    put(os, r.phi2);
    put(os, r.q2);
  }
  if (!os) fail(ErrorKind::Io, "round records: write failed");
}

std::vector<RoundRecord> read_rounds_binary(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kRoundMagic, sizeof magic) != 0) {
    fail(ErrorKind::Io, "round records: bad binary magic");
  }
  std::vector<RoundRecord> out;
  while (true) {
    std::uint8_t bytes[6];
    is.read(reinterpret_cast<char*>(bytes), sizeof bytes);
    if (is.gcount() == 0) break;
    double v[4];
    is.read(reinterpret_cast<char*>(v), sizeof v);
    if (!is) fail(ErrorKind::Io, "round records: truncated binary record");
    if (bytes[0] >= kIntensityLevels || bytes[1] > 1 || bytes[2] > 1 || bytes[3] > 3 || bytes[4] > 1 ||
        bytes[5] > 5) {
      fail(ErrorKind::Io, "round records: field out of range");
    }
    RoundRecord r;
    r.intensity = bytes[0];
    r.alice_basis = static_cast<AliceBasis>(bytes[1]);
    r.key_bit = bytes[2];
    r.phase_index = bytes[3];
    r.bob_basis = static_cast<BobBasis>(bytes[4]);
    r.tag = static_cast<VirtualTag>(bytes[5]);
    r.phi1 = v[0];
    r.q1 = v[1];
    r.phi2 = v[2];
    r.q2 = v[3];
    out.push_back(r);
  }
  return out;
}

}  // namespace tbcv
