#pragma once

#include "tbcv/channel.hpp"
#include "tbcv/yields.hpp"

namespace tbcv {

struct KeyRateInput {
  TagStats stats;
  double f = 1.0;   // reconciliation efficiency
  int max_m = 2;    // highest tagged photon number used
};

struct KeyRate {
  double raw = 0.0;       // may be negative
  double reported = 0.0;  // clamped at 0
};

KeyRate key_rate_reverse(const KeyRateInput& in);
KeyRate key_rate_forward(const KeyRateInput& in);

/// -log2(1 - eta).
double plob_bound(double eta);

inline constexpr int kMaxTaggedPhotons = 6;

struct IPhotonOptions {
  VacuumFactor vacuum = VacuumFactor::Consistent;
  double f = 1.0;
};

/// Tag statistics from the thermal-decomposition closed forms (perfect decoy), truncated at m = i.
TagStats closed_form_tag_stats(int i, double mu, double tau, const ChannelParams& channel,
                               VacuumFactor vacuum = VacuumFactor::Consistent);

/// Reverse-reconciliation rate of the i-photon protocol with exact tagged quantities.
KeyRate i_photon_key_rate(int i, double mu, double tau, const ChannelParams& channel,
                          const IPhotonOptions& opt = {});

/// Contribution of tags i+1..kMaxTaggedPhotons that the i-photon rate leaves out (noiseless closed forms).
double truncation_gap(int i, double mu, double tau, double eta);

}  // namespace tbcv
