#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "tbcv/simplex.hpp"

using namespace tbcv;

namespace {

// Minimum of c.x over a box-bounded polytope in three variables by enumerating every vertex:
// each triple of active planes (rows or bounds) is solved by Cramer's rule and kept if feasible.
struct Plane {
  std::array<double, 3> a;
  double b;
};

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double vertex_min(const LinearProgram& lp, bool& feasible) {
  std::vector<Plane> planes;
  for (const auto& r : lp.rows) planes.push_back({{r.a[0], r.a[1], r.a[2]}, r.b});
  for (int j = 0; j < 3; ++j) {
    Plane lo{{0, 0, 0}, lp.lower[j]};
    lo.a[j] = 1;
    Plane hi{{0, 0, 0}, lp.upper[j]};
    hi.a[j] = 1;
    planes.push_back(lo);
    planes.push_back(hi);
  }
  auto is_feasible = [&](const std::array<double, 3>& x) {
    for (int j = 0; j < 3; ++j)
      if (x[j] < lp.lower[j] - 1e-9 || x[j] > lp.upper[j] + 1e-9) return false;
    for (const auto& r : lp.rows) {
      const double v = r.a[0] * x[0] + r.a[1] * x[1] + r.a[2] * x[2];
      if (r.sense == RowSense::LessEq && v > r.b + 1e-9) return false;
      if (r.sense == RowSense::GreaterEq && v < r.b - 1e-9) return false;
      if (r.sense == RowSense::Equal && std::abs(v - r.b) > 1e-9) return false;
    }
    return true;
  };
  double best = std::numeric_limits<double>::infinity();
  feasible = false;
  const std::size_t n = planes.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        std::array<std::array<double, 3>, 3> m = {planes[i].a, planes[j].a, planes[k].a};
        const double d = det3(m);
        if (std::abs(d) < 1e-12) continue;
        std::array<double, 3> x{};
        for (int c = 0; c < 3; ++c) {
          auto mc = m;
          mc[0][c] = planes[i].b;
          mc[1][c] = planes[j].b;
          mc[2][c] = planes[k].b;
          x[c] = det3(mc) / d;
        }
        if (!is_feasible(x)) continue;
        feasible = true;
        best = std::min(best, lp.c[0] * x[0] + lp.c[1] * x[1] + lp.c[2] * x[2]);
      }
  return best;
}

}  // namespace

TEST(Simplex, TextbookMaximization) {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
  LinearProgram lp;
  lp.c = {-3, -5};
  lp.lower = {0, 0};
  lp.upper = {kLpInfinity, kLpInfinity};
  lp.rows = {{{1, 0}, RowSense::LessEq, 4}, {{0, 2}, RowSense::LessEq, 12}, {{3, 2}, RowSense::LessEq, 18}};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -36.0, 1e-12);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 6.0, 1e-12);
}

TEST(Simplex, EqualityAndGreaterRows) {
  // min x + y s.t. x + 2y = 4, x >= 1 (row), x, y in [0, 10] -> (1, 1.5), objective 2.5.
  LinearProgram lp;
  lp.c = {1, 1};
  lp.lower = {0, 0};
  lp.upper = {10, 10};
  lp.rows = {{{1, 2}, RowSense::Equal, 4}, {{1, 0}, RowSense::GreaterEq, 1}};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, 2.5, 1e-12);
}

TEST(Simplex, Infeasible) {
  LinearProgram lp;
  lp.c = {1};
  lp.lower = {0};
  lp.upper = {1};
  lp.rows = {{{1}, RowSense::GreaterEq, 2}};
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Infeasible);
}

TEST(Simplex, Unbounded) {
  LinearProgram lp;
  lp.c = {-1, 0};
  lp.lower = {0, 0};
  lp.upper = {kLpInfinity, 1};
  lp.rows = {{{1, -1}, RowSense::GreaterEq, 0}};
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);
}

TEST(Simplex, DegenerateVertex) {
  // Several constraints meet at the optimum; Bland's rule must terminate.
  LinearProgram lp;
  lp.c = {-1, -1};
  lp.lower = {0, 0};
  lp.upper = {1, 1};
  lp.rows = {{{1, 1}, RowSense::LessEq, 1}, {{1, 0}, RowSense::LessEq, 1}, {{0, 1}, RowSense::LessEq, 1},
             {{2, 2}, RowSense::LessEq, 2}, {{1, -1}, RowSense::LessEq, 1}};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -1.0, 1e-12);
}

TEST(Simplex, RandomInstancesMatchVertexEnumeration) {
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int feasible_count = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram lp;
    lp.c = {u(gen), u(gen), u(gen)};
    lp.lower = {0, 0, 0};
    lp.upper = {1, 1, 1};
    const int rows = 1 + trial % 4;
    for (int i = 0; i < rows; ++i) {
      LpRow row;
      row.a = {u(gen), u(gen), u(gen)};
      row.sense = i % 2 ? RowSense::GreaterEq : RowSense::LessEq;
      row.b = 0.5 * u(gen);
      lp.rows.push_back(row);
    }
    bool feasible = false;
    const double ref = vertex_min(lp, feasible);
    const auto r = solve_lp(lp);
    if (!feasible) {
      EXPECT_EQ(r.status, LpStatus::Infeasible) << trial;
      continue;
    }
    ++feasible_count;
    ASSERT_EQ(r.status, LpStatus::Optimal) << trial;
    EXPECT_NEAR(r.objective, ref, 1e-9) << trial;
  }
  EXPECT_GT(feasible_count, 100);
}

TEST(Simplex, Deterministic) {
  LinearProgram lp;
  lp.c = {0.3, -0.7, 0.1};
  lp.lower = {0, 0, 0};
  lp.upper = {1, 1, 1};
  lp.rows = {{{1, 1, 1}, RowSense::LessEq, 1.5}, {{0.2, 0.4, -0.1}, RowSense::GreaterEq, 0.05}};
  const auto a = solve_lp(lp);
  const auto b = solve_lp(lp);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.x, b.x);
}
