#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tbcv/channel.hpp"
#include "tbcv/decoy.hpp"

namespace tbcv {

enum class Objective {
  IdealPhotons,   // i-photon protocol with ideal tag statistics
  Decoy,          // four-intensity decoy LP (mu, nu1, nu2, vacuum)
  InfiniteDecoy,  // two-photon protocol with exact per-photon yields
};

std::string objective_id(Objective o);
Objective parse_objective(const std::string& id);

struct SearchSpace {
  std::vector<double> mu;
  std::vector<double> tau;
  std::vector<double> nu1{0.0};
  std::vector<double> nu2{0.0};
  Objective objective = Objective::IdealPhotons;
  int photons = 2;
  double f = 1.0;
  VacuumFactor vacuum = VacuumFactor::Consistent;
  /// Coordinate-descent sweeps after the grid pass; 0 keeps the pure grid result.
  int refine_sweeps = 0;

  void validate() const;
};

/// first * ratio^-k for k = 0..count-1, returned in increasing order.
std::vector<double> geometric_grid(double first, double ratio, int count);
/// start + step * k for k = k_min..k_max.
std::vector<double> linear_grid(double start, double step, int k_min, int k_max);

/// mu = 2.395 / 1.2691^k (k = 0..20) and tau = 1.437 + 0.2039 k (k = -3..18).
SearchSpace default_search_space(Objective objective, int photons = 2);

struct Candidate {
  double mu = 0.0;
  double tau = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
};

struct Evaluation {
  double rate = 0.0;  // raw rate; -infinity where undefined
  double e_z = 0.0;
};

Evaluation evaluate_objective(const SearchSpace& space, const ChannelParams& channel,
                              const Candidate& c);

struct OptimizeResult {
  Candidate best;
  double rate = 0.0;
  double e_z = 0.0;
  bool positive = false;
  std::size_t evaluations = 0;
};

/// Exhaustive grid pass in lexicographic (mu, tau, nu1, nu2) order; ties keep the earliest point.
/// Points are evaluated on up to `threads` workers; the reduction is order-fixed.
OptimizeResult optimize(const SearchSpace& space, const ChannelParams& channel, int threads = 1);

/// CSV `distance_km,mu,tau,nu1,nu2,rate,e_z` with 9 significant digits.
void write_optimum_header(std::ostream& os);
void write_optimum_row(std::ostream& os, double distance_km, const OptimizeResult& r);

}  // namespace tbcv
