#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "tbcv/channel.hpp"

namespace tbcv {

enum class Observable {
  P00,
  P01,
  P10,
  P11,
  P02,
  P20,
  Psi1Plus,
  Psi1Minus,
  Psi2Plus,
  Psi2Minus,
};

inline constexpr std::array<Observable, 10> kAllObservables = {
    Observable::P00,      Observable::P01,       Observable::P10,      Observable::P11,
    Observable::P02,      Observable::P20,       Observable::Psi1Plus, Observable::Psi1Minus,
    Observable::Psi2Plus, Observable::Psi2Minus,
};

std::string_view observable_id(Observable obs);
Observable parse_observable(std::string_view id);

/// Z: one bin carries the pulse, the other vacuum. PhiN: both bins at half intensity with relative phase N degrees.
enum class SourceConfig { Z, Phi0, Phi90, Phi180, Phi270 };

inline constexpr std::array<SourceConfig, 5> kAllConfigs = {
    SourceConfig::Z, SourceConfig::Phi0, SourceConfig::Phi90, SourceConfig::Phi180,
    SourceConfig::Phi270};

std::string_view config_id(SourceConfig cfg);
SourceConfig parse_config(std::string_view id);
double config_phase(SourceConfig cfg);

struct YieldModel {
  double eta = 1.0;
  double xi = 0.0;
  double delta = 0.0;  // extra relative phase on the second bin of phase configs
  FockElementForm form = FockElementForm::Physical;

  static YieldModel from(const ChannelParams& ch);
};

/// Expectation of the observable on the channel output for a phase-randomized source at intensity mu.
double observed_yield(SourceConfig cfg, double mu, Observable obs, const YieldModel& model);

/// Same expectation for an explicit product of two thermal-channel outputs with output amplitudes a, b.
double product_state_expectation(std::complex<double> a, std::complex<double> b, double xi,
                                 Observable obs,
                                 FockElementForm form = FockElementForm::Physical);

/// Exact per-photon-number yields y_0..y_max with observed_yield = sum_k Pr(k|mu) y_k.
std::vector<double> photon_yields(SourceConfig cfg, Observable obs, const YieldModel& model,
                                  int max_m);

}  // namespace tbcv
