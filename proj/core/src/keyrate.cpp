#include "tbcv/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tbcv {

namespace {

void validate_input(const KeyRateInput& in) {
  if (!(in.f >= 1.0)) fail(ErrorKind::Domain, "reconciliation efficiency f must be >= 1");
  in.stats.validate();
}

double tagged_sum(const KeyRateInput& in) {
  double acc = 0.0;
  for (const auto& [m, q] : in.stats.q_mm) {
    if (m < 1 || m > in.max_m) continue;
    const auto it = in.stats.e_x_mm.find(m);
    const double e = it == in.stats.e_x_mm.end() ? 0.0 : std::min(it->second, 0.5);
    acc += q * (1.0 - binary_entropy(e));
  }
  return acc;
}

}  // namespace

KeyRate key_rate_forward(const KeyRateInput& in) {
  validate_input(in);
  KeyRate r;
  r.raw = tagged_sum(in) - in.f * in.stats.q_z * binary_entropy(in.stats.e_z);
  r.reported = std::max(0.0, r.raw);
  return r;
}

KeyRate key_rate_reverse(const KeyRateInput& in) {
  validate_input(in);
  KeyRate r;
  r.raw = in.stats.q_star_0 + tagged_sum(in) - in.f * in.stats.q_z * binary_entropy(in.stats.e_z);
  r.reported = std::max(0.0, r.raw);
  return r;
}

double plob_bound(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::Domain, "plob_bound: eta outside (0,1)");
  return -std::log1p(-eta) / std::numbers::ln2;
}

TagStats closed_form_tag_stats(int i, double mu, double tau, const ChannelParams& channel,
                               VacuumFactor vacuum) {
  if (i < 1 || i > kMaxTaggedPhotons) fail(ErrorKind::Domain, "tag truncation must be in 1..6");
  channel.validate();
  const double eta = channel.transmittance();
  const double xi = channel.excess_noise_xi;
  const auto rc = region_coefficients(tau, vacuum);
  const auto z = z_gain_and_error(mu, eta, xi, tau);

  TagStats s;
  s.q_z = z.q_z;
  s.e_z = z.e_z;
  s.q_star_0 = vacuum_receive_prob(mu, eta, xi) * rc.vac_accept;
  if (mu == 0.0) return s;
  if (xi > 0.0 && i > 2) {
    fail(ErrorKind::Config, "closed forms above two photons exist only for a noiseless channel");
  }
  if (xi > 0.0) {
    // thermal decomposition; thermal_mean() rejects unit transmittance
    (void)channel.thermal_mean();
    s.q_mm[1] = tagged_gain_Q11(mu, channel, rc);
    s.e_x_mm[1] = tagged_error_e11(mu, channel, rc);
    if (i >= 2) {
      s.q_mm[2] = tagged_gain_Q22(mu, channel, rc);
      s.e_x_mm[2] = tagged_error_e22(mu, channel, rc);
    }
    return s;
  }
  for (int m = 1; m <= i; ++m) {
    s.q_mm[m] = tagged_gain_ideal(m, mu, eta, tau);
    s.e_x_mm[m] = s.q_mm[m] > 0.0
                      ? tagged_error_ideal(m, mu, eta, channel.misalignment_delta, tau)
                      : 0.0;
  }
  return s;
}

KeyRate i_photon_key_rate(int i, double mu, double tau, const ChannelParams& channel,
                          const IPhotonOptions& opt) {
  KeyRateInput in;
  in.stats = closed_form_tag_stats(i, mu, tau, channel, opt.vacuum);
  in.f = opt.f;
  in.max_m = i;
  for (auto& [m, e] : in.stats.e_x_mm) e = std::min(e, 1.0);
  return key_rate_reverse(in);
}

double truncation_gap(int i, double mu, double tau, double eta) {
  double gap = 0.0;
  for (int m = i + 1; m <= kMaxTaggedPhotons; ++m) gap += tagged_gain_ideal(m, mu, eta, tau);
  return gap;
}

}  // namespace tbcv
