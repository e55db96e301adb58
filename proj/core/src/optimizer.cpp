#include "tbcv/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "tbcv/keyrate.hpp"
#include "tbcv/parallel.hpp"

namespace tbcv {

namespace {

constexpr double kUndefined = -std::numeric_limits<double>::infinity();

void check_grid(const std::vector<double>& g, const char* name, bool allow_zero) {
  if (g.empty()) fail(ErrorKind::Config, std::string("search grid '") + name + "' is empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]) || g[i] < 0.0 || (!allow_zero && g[i] == 0.0)) {
      fail(ErrorKind::Config, std::string("search grid '") + name + "' has an invalid value");
    }
    if (i > 0 && !(g[i] > g[i - 1])) {
      fail(ErrorKind::Config, std::string("search grid '") + name + "' must be strictly increasing");
    }
  }
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Golden-section maximization of g on [lo, hi].
template <class G>
std::pair<double, double> golden_max(const G& g, double lo, double hi, int iterations) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = g(x1);
  double f2 = g(x2);
  for (int it = 0; it < iterations; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = g(x1);
    }
  }
  return f1 >= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

double neighbor_step(const std::vector<double>& grid, double x) {
  if (grid.size() < 2) return 0.0;
  double step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < grid.size(); ++i) step = std::min(step, grid[i] - grid[i - 1]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (x >= grid[i - 1] && x <= grid[i]) step = grid[i] - grid[i - 1];
  }
  return step;
}

}  // namespace

std::string objective_id(Objective o) {
  switch (o) {
    case Objective::IdealPhotons: return "ideal";
    case Objective::Decoy: return "decoy";
    case Objective::InfiniteDecoy: return "infinite-decoy";
  }
  return "ideal";
}

Objective parse_objective(const std::string& id) {
  if (id == "ideal") return Objective::IdealPhotons;
  if (id == "decoy") return Objective::Decoy;
  if (id == "infinite-decoy") return Objective::InfiniteDecoy;
  fail(ErrorKind::Config, "unknown objective '" + id + "' (ideal, decoy, infinite-decoy)");
}

void SearchSpace::validate() const {
  check_grid(mu, "mu", false);
  check_grid(tau, "tau", false);
  check_grid(nu1, "nu1", true);
  check_grid(nu2, "nu2", true);
  if (photons < 1 || photons > kMaxTaggedPhotons) fail(ErrorKind::Config, "photons must lie in 1..6");
  if (!(f >= 1.0)) fail(ErrorKind::Config, "reconciliation efficiency f must be >= 1");
  if (refine_sweeps < 0 || refine_sweeps > 3) fail(ErrorKind::Config, "refine_sweeps must lie in 0..3");
}

std::vector<double> geometric_grid(double first, double ratio, int count) {
  if (!(first > 0.0) || !(ratio > 1.0) || count < 1) fail(ErrorKind::Config, "invalid geometric grid");
  std::vector<double> g(count);
  for (int k = 0; k < count; ++k) g[count - 1 - k] = first / std::pow(ratio, k);
  return g;
}

std::vector<double> linear_grid(double start, double step, int k_min, int k_max) {
  if (!(step > 0.0) || k_max < k_min) fail(ErrorKind::Config, "invalid linear grid");
  std::vector<double> g;
  for (int k = k_min; k <= k_max; ++k) g.push_back(start + step * k);
  return g;
}

SearchSpace default_search_space(Objective objective, int photons) {
  SearchSpace s;
  s.objective = objective;
  s.photons = photons;
  s.mu = geometric_grid(2.395, 1.2691, 21);
  s.tau = linear_grid(1.437, 0.2039, -3, 18);
  if (objective == Objective::Decoy) {
    s.nu1 = geometric_grid(0.3, 2.0, 12);
    s.nu2 = {1e-4, 1.562e-4, 2.441e-4};
  }
  return s;
}

Evaluation evaluate_objective(const SearchSpace& space, const ChannelParams& channel,
                              const Candidate& c) {
  Evaluation ev;
  const auto model = YieldModel::from(channel);
  ev.e_z = z_gain_and_error(c.mu, model.eta, model.xi, c.tau).e_z;
  try {
    switch (space.objective) {
      case Objective::IdealPhotons:
        ev.rate = i_photon_key_rate(space.photons, c.mu, c.tau, channel, {space.vacuum, space.f}).raw;
        break;
      case Objective::InfiniteDecoy: {
        ProtocolParams p{c.mu, c.nu1, c.nu2, c.tau, 2, space.f, space.vacuum};
        ev.rate = infinite_decoy_key_rate(p, channel).raw;
        break;
      }
      case Objective::Decoy: {
        if (!(c.nu1 < c.mu && c.nu2 < c.nu1 && c.nu2 > 0.0)) {
          ev.rate = kUndefined;
          break;
        }
        ProtocolParams p{c.mu, c.nu1, c.nu2, c.tau, 2, space.f, space.vacuum};
        ev.rate = key_rate_with_decoy(make_yield_table(p, channel), p).raw;
        break;
      }
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UndefinedRate && e.kind() != ErrorKind::Inconsistent) throw;
    ev.rate = kUndefined;
  }
  return ev;
}

OptimizeResult optimize(const SearchSpace& space, const ChannelParams& channel, int threads) {
  space.validate();
  channel.validate();
  const std::size_t n_mu = space.mu.size();
  const std::size_t n_tau = space.tau.size();
  const std::size_t n_nu1 = space.nu1.size();
  const std::size_t n_nu2 = space.nu2.size();
  const std::size_t total = n_mu * n_tau * n_nu1 * n_nu2;

  auto candidate = [&](std::size_t idx) {
    const std::size_t i4 = idx % n_nu2;
    const std::size_t i3 = (idx / n_nu2) % n_nu1;
    const std::size_t i2 = (idx / (n_nu2 * n_nu1)) % n_tau;
    const std::size_t i1 = idx / (n_nu2 * n_nu1 * n_tau);
    return Candidate{space.mu[i1], space.tau[i2], space.nu1[i3], space.nu2[i4]};
  };

  std::vector<Evaluation> evals(total);
  constexpr std::size_t kChunk = 16;
  run_blocks((total + kChunk - 1) / kChunk, threads, [&](std::size_t b) {
    const std::size_t end = std::min(total, (b + 1) * kChunk);
    for (std::size_t i = b * kChunk; i < end; ++i) evals[i] = evaluate_objective(space, channel, candidate(i));
  });

  OptimizeResult res;
  res.evaluations = total;
  std::size_t best = 0;
  for (std::size_t i = 1; i < total; ++i) {
    if (evals[i].rate > evals[best].rate) best = i;
  }
  res.best = candidate(best);
  res.rate = evals[best].rate;
  res.e_z = evals[best].e_z;

  for (int sweep = 0; sweep < space.refine_sweeps; ++sweep) {
    bool improved = false;
    auto refine = [&](double Candidate::*field, const std::vector<double>& grid) {
      const double step = neighbor_step(grid, res.best.*field);
      if (step <= 0.0) return;
      const double lo = std::max(0.5 * (res.best.*field), res.best.*field - step);
      const double hi = res.best.*field + step;
      auto g = [&](double x) {
        Candidate c = res.best;
        c.*field = x;
        ++res.evaluations;
        return evaluate_objective(space, channel, c).rate;
      };
      const auto [x, v] = golden_max(g, lo, hi, 30);
      if (v > res.rate) {
        res.best.*field = x;
        res.rate = v;
        improved = true;
      }
    };
    refine(&Candidate::mu, space.mu);
    refine(&Candidate::tau, space.tau);
    if (space.objective == Objective::Decoy) {
      refine(&Candidate::nu1, space.nu1);
      refine(&Candidate::nu2, space.nu2);
    }
    if (!improved) break;
  }
  if (space.refine_sweeps > 0) res.e_z = evaluate_objective(space, channel, res.best).e_z;
  res.positive = res.rate > 0.0;
  return res;
}

void write_optimum_header(std::ostream& os) { os << "distance_km,mu,tau,nu1,nu2,rate,e_z\n"; }

void write_optimum_row(std::ostream& os, double distance_km, const OptimizeResult& r) {
  os << fmt9(distance_km) << ',' << fmt9(r.best.mu) << ',' << fmt9(r.best.tau) << ','
     << fmt9(r.best.nu1) << ',' << fmt9(r.best.nu2) << ',' << fmt9(r.rate) << ',' << fmt9(r.e_z)
     << '\n';
}

}  // namespace tbcv
