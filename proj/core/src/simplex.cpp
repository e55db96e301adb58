#include "tbcv/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "tbcv/error.hpp"

namespace tbcv {

namespace {

struct Tableau {
  int rows = 0;
  int cols = 0;  // excluding the right-hand side
  std::vector<double> t;
  std::vector<int> basis;

  double& at(int r, int c) { return t[static_cast<std::size_t>(r) * (cols + 1) + c]; }
  double at(int r, int c) const { return t[static_cast<std::size_t>(r) * (cols + 1) + c]; }
  double& rhs(int r) { return at(r, cols); }
  double rhs(int r) const { return at(r, cols); }

  void pivot(int pr, int pc) {
    const double p = at(pr, pc);
    for (int c = 0; c <= cols; ++c) at(pr, c) /= p;
    for (int r = 0; r < rows; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
    }
    basis[pr] = pc;
  }

  void drop_row(int r) {
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(r) * (cols + 1),
            t.begin() + static_cast<std::ptrdiff_t>(r + 1) * (cols + 1));
    basis.erase(basis.begin() + r);
    --rows;
  }
};

enum class PhaseResult { Optimal, Unbounded };

PhaseResult run_phase(Tableau& tab, const std::vector<double>& cost,
                      const std::vector<bool>& allowed, const SimplexOptions& opt) {
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    int enter = -1;
    for (int j = 0; j < tab.cols; ++j) {
      if (!allowed[j]) continue;
      double d = cost[j];
      for (int r = 0; r < tab.rows; ++r) d -= cost[tab.basis[r]] * tab.at(r, j);
      if (d < -opt.pivot_tol) {
        enter = j;  // Bland: lowest index
        break;
      }
    }
    if (enter < 0) return PhaseResult::Optimal;
    int leave = -1;
    double best = 0.0;
    for (int r = 0; r < tab.rows; ++r) {
      const double a = tab.at(r, enter);
      if (a <= opt.pivot_tol) continue;
      const double ratio = std::max(0.0, tab.rhs(r)) / a;
      if (leave < 0 || ratio < best - 1e-15 ||
          (ratio <= best + 1e-15 && tab.basis[r] < tab.basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave < 0) return PhaseResult::Unbounded;
    tab.pivot(leave, enter);
  }
  fail(ErrorKind::Numeric, "simplex: iteration limit reached");
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opt) {
  const int n = static_cast<int>(lp.c.size());
  if (static_cast<int>(lp.lower.size()) != n || static_cast<int>(lp.upper.size()) != n) {
    fail(ErrorKind::Domain, "solve_lp: bound vectors must match the objective size");
  }
  LpResult res;
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lower[j])) fail(ErrorKind::Domain, "solve_lp: lower bounds must be finite");
    if (lp.upper[j] < lp.lower[j]) return res;
  }

  // Shift x = lower + x', add upper-bound rows, flip rows to b >= 0, normalize.
  struct Work {
    std::vector<double> a;
    RowSense sense;
    double b;
  };
  std::vector<Work> work;
  for (const auto& row : lp.rows) {
    if (static_cast<int>(row.a.size()) != n) fail(ErrorKind::Domain, "solve_lp: row width mismatch");
    Work w{row.a, row.sense, row.b};
    for (int j = 0; j < n; ++j) w.b -= row.a[j] * lp.lower[j];
    work.push_back(std::move(w));
  }
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lp.upper[j])) {
      Work w{std::vector<double>(n, 0.0), RowSense::LessEq, lp.upper[j] - lp.lower[j]};
      w.a[j] = 1.0;
      work.push_back(std::move(w));
    }
  }
  std::vector<Work> kept;
  for (auto& w : work) {
    double scale = 0.0;
    for (double v : w.a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) {
      const bool ok = (w.sense == RowSense::LessEq && w.b >= -opt.feasibility_tol) ||
                      (w.sense == RowSense::GreaterEq && w.b <= opt.feasibility_tol) ||
                      (w.sense == RowSense::Equal && std::abs(w.b) <= opt.feasibility_tol);
      if (!ok) return res;
      continue;
    }
    for (double& v : w.a) v /= scale;
    w.b /= scale;
    if (w.b < 0.0) {
      for (double& v : w.a) v = -v;
      w.b = -w.b;
      if (w.sense == RowSense::LessEq) {
        w.sense = RowSense::GreaterEq;
      } else if (w.sense == RowSense::GreaterEq) {
        w.sense = RowSense::LessEq;
      }
    }
    kept.push_back(std::move(w));
  }

  const int m = static_cast<int>(kept.size());
  int n_slack = 0;
  int n_art = 0;
  for (const auto& w : kept) {
    if (w.sense != RowSense::Equal) ++n_slack;
    if (w.sense != RowSense::LessEq) ++n_art;
  }
  Tableau tab;
  tab.rows = m;
  tab.cols = n + n_slack + n_art;
  tab.t.assign(static_cast<std::size_t>(m) * (tab.cols + 1), 0.0);
  tab.basis.assign(m, -1);
  int slack = n;
  int art = n + n_slack;
  for (int r = 0; r < m; ++r) {
    const auto& w = kept[r];
    for (int j = 0; j < n; ++j) tab.at(r, j) = w.a[j];
    tab.rhs(r) = w.b;
    if (w.sense == RowSense::LessEq) {
      tab.at(r, slack) = 1.0;
      tab.basis[r] = slack++;
    } else if (w.sense == RowSense::GreaterEq) {
      tab.at(r, slack++) = -1.0;
      tab.at(r, art) = 1.0;
      tab.basis[r] = art++;
    } else {
      tab.at(r, art) = 1.0;
      tab.basis[r] = art++;
    }
  }

  const int first_art = n + n_slack;
  std::vector<bool> allowed(tab.cols, true);
  if (n_art > 0) {
    std::vector<double> cost1(tab.cols, 0.0);
    for (int j = first_art; j < tab.cols; ++j) cost1[j] = 1.0;
    run_phase(tab, cost1, allowed, opt);
    double infeas = 0.0;
    for (int r = 0; r < tab.rows; ++r) {
      if (tab.basis[r] >= first_art) infeas += std::max(0.0, tab.rhs(r));
    }
    if (infeas > opt.feasibility_tol) return res;
    for (int r = tab.rows - 1; r >= 0; --r) {
      if (tab.basis[r] < first_art) continue;
      int pc = -1;
      for (int j = 0; j < first_art; ++j) {
        if (std::abs(tab.at(r, j)) > opt.pivot_tol) {
          pc = j;
          break;
        }
      }
      if (pc >= 0) {
        tab.pivot(r, pc);
      } else {
        tab.drop_row(r);
      }
    }
    for (int j = first_art; j < tab.cols; ++j) allowed[j] = false;
  }

  std::vector<double> cost2(tab.cols, 0.0);
  for (int j = 0; j < n; ++j) cost2[j] = lp.c[j];
  if (run_phase(tab, cost2, allowed, opt) == PhaseResult::Unbounded) {
    res.status = LpStatus::Unbounded;
    return res;
  }

  res.status = LpStatus::Optimal;
  res.x = lp.lower;
  for (int r = 0; r < tab.rows; ++r) {
    if (tab.basis[r] < n) res.x[tab.basis[r]] += std::max(0.0, tab.rhs(r));
  }
  res.objective = 0.0;
  for (int j = 0; j < n; ++j) res.objective += lp.c[j] * res.x[j];
  return res;
}

}  // namespace tbcv
