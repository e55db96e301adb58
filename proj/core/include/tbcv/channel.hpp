#pragma once

#include <complex>
#include <map>

#include "tbcv/specfun.hpp"

namespace tbcv {

struct ChannelParams {
  double distance_km = 0.0;
  double attenuation_db_per_km = 0.2;
  double detector_efficiency = 1.0;
  double excess_noise_xi = 0.0;      // referred to channel output
  double misalignment_delta = 0.0;   // radians
  int cutoff_Nc = 3;

  double transmittance() const;
  /// xi / (2(1 - eta)); throws a config error for eta = 1 with xi > 0.
  double thermal_mean() const;
  void validate() const;
};

struct ThermalChannel {
  double eta = 1.0;
  double xi = 0.0;
};

ThermalChannel compose_channels(const ThermalChannel& first, const ThermalChannel& second);

struct TagStats {
  double q_star_0 = 0.0;
  std::map<int, double> q_mm;
  std::map<int, double> e_x_mm;
  double q_z = 0.0;
  double e_z = 0.0;

  void validate() const;
};

struct ZStats {
  double q_z = 0.0;
  double e_z = 0.0;
};

/// Acceptance and bit-error rate of the Z-basis key map under the Gaussian quadrature law.
ZStats z_gain_and_error(double mu, double eta, double xi, double tau);

/// (2/(2+xi))^2 exp(-2 eta mu / (2+xi)).
double vacuum_receive_prob(double mu, double eta, double xi);

/// P_th(k) = kbar^k / (kbar+1)^{k+1}.
double thermal_photon_prob(double kbar, int k);

// Thermal-decomposition closed forms, summed over k, l <= Nc.
double tagged_gain_Q11(double mu, const ChannelParams& ch, const RegionCoefficients& rc);
double tagged_error_e11(double mu, const ChannelParams& ch, const RegionCoefficients& rc);
double tagged_gain_Q22(double mu, const ChannelParams& ch, const RegionCoefficients& rc);
double tagged_error_e22(double mu, const ChannelParams& ch, const RegionCoefficients& rc);

/// Noiseless-channel gain c_m Pr(m) eta^m for any m >= 1.
double tagged_gain_ideal(int m, double mu, double eta, double tau);
/// Noiseless-channel phase-error rate with the misalignment term sin^2(m delta / 2) / eta.
double tagged_error_ideal(int m, double mu, double eta, double delta, double tau);

enum class FockElementForm {
  Physical,  // displaced-thermal values
  Printed,   // the printed table, including its sign on <0|rho|1> and (1 - kappa^2) in <2|rho|2>
};

/// <m|rho_alpha|n> for the thermal-channel output of a coherent state; alpha is the output amplitude.
std::complex<double> coherent_output_fock_element(std::complex<double> alpha, double xi, int m,
                                                  int n,
                                                  FockElementForm form = FockElementForm::Physical);

}  // namespace tbcv
