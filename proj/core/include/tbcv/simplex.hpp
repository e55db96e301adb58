#pragma once

#include <limits>
#include <vector>

namespace tbcv {

enum class RowSense { LessEq, Equal, GreaterEq };

struct LpRow {
  std::vector<double> a;
  RowSense sense = RowSense::LessEq;
  double b = 0.0;
};

/// minimize c.x subject to rows and lower <= x <= upper (upper may be +inf).
struct LinearProgram {
  std::vector<double> c;
  std::vector<LpRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

struct SimplexOptions {
  double pivot_tol = 1e-12;
  double feasibility_tol = 1e-11;
  int max_iterations = 10000;
};

/// Dense two-phase simplex with Bland's rule; deterministic for identical inputs.
LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {});

inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

}  // namespace tbcv
