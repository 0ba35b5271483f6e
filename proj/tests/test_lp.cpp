#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "dipps/lp.hpp"

using namespace dipps;

namespace {

std::uint64_t test_seed() {
  if (const char* s = std::getenv("DIPPS_SEED")) return std::strtoull(s, nullptr, 10);
  return 20240901ull;
}

// Dual objective for min c'x s.t. rows, l <= x <= u, from the solver's
// multipliers: g(y) = y'b + sum_j min(d_j*l_j, d_j*u_j) with d = c - A'y.
double dual_bound(const LinearProgram& lp, const LpSolution& sol) {
  double g = 0.0;
  for (size_t i = 0; i < lp.rows.size(); ++i) g += sol.row_duals[i] * lp.rows[i].rhs;
  for (int j = 0; j < lp.num_vars; ++j) {
    double d = sol.reduced_costs[j];
    g += d > 0.0 ? d * lp.lower[j] : d * lp.upper[j];
  }
  return g;
}

}  // namespace

TEST_CASE("single variable, maximize by minimizing negative") {
  LinearProgram lp;
  int x = lp.add_var(0.0, 2.0, -1.0);
  (void)x;
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sol.objective == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("conflicting rows are infeasible") {
  LinearProgram lp;
  int x = lp.add_var(-5.0, 5.0, 0.0);
  lp.add_row(Relation::Le, 0.0, {{x, 1.0}});    // x <= 0
  lp.add_row(Relation::Le, -1.0, {{x, -1.0}});  // x >= 1
  auto sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::Infeasible);
}

TEST_CASE("covering row") {
  LinearProgram lp;
  int x = lp.add_var(0.0, 10.0, 1.0);
  int y = lp.add_var(0.0, 10.0, 1.0);
  lp.add_row(Relation::Le, -1.0, {{x, -1.0}, {y, -1.0}});  // x + y >= 1
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("equality rows and fixed variables") {
  LinearProgram lp;
  int a = lp.add_var(0.0, 4.0, 2.0);
  int b = lp.add_var(0.0, 4.0, 1.0);
  int c = lp.add_var(1.5, 1.5, 5.0);
  lp.add_row(Relation::Eq, 3.0, {{a, 1.0}, {b, 1.0}, {c, 1.0}});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[c] == doctest::Approx(1.5));
  CHECK(sol.x[b] == doctest::Approx(1.5));
  CHECK(sol.x[a] == doctest::Approx(0.0));
  CHECK(sol.objective == doctest::Approx(1.5 + 7.5).epsilon(1e-9));
}

TEST_CASE("strong duality and determinism on random dense LPs") {
  std::mt19937_64 rng(test_seed());
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.0, 3.0);
  std::uniform_int_distribution<int> mdist(1, 50), ndist(2, 100);

  int optimal_seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int m = mdist(rng), n = ndist(rng);
    LinearProgram lp;
    for (int j = 0; j < n; ++j) {
      double l = -pos(rng), u = pos(rng);
      lp.add_var(l, u, coef(rng));
    }
    std::uniform_int_distribution<int> reldist(0, 3);
    for (int i = 0; i < m; ++i) {
      LinearProgram::Row row;
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < n; ++j) {
        double v = coef(rng);
        if (std::fabs(v) > 0.5) terms.push_back({j, v});
      }
      if (terms.empty()) terms.push_back({0, 1.0});
      Relation rel = reldist(rng) == 0 ? Relation::Eq : Relation::Le;
      lp.add_row(rel, coef(rng), std::move(terms));
    }

    auto s1 = solve_lp(lp);
    auto s2 = solve_lp(lp);
    REQUIRE(s1.status == s2.status);
    if (s1.status == LpStatus::Optimal) {
      ++optimal_seen;
      for (int j = 0; j < n; ++j) CHECK(s1.x[j] == s2.x[j]);  // bitwise identical
      // primal feasibility
      for (const auto& row : lp.rows) {
        double lhs = 0.0;
        for (auto [j, v] : row.terms) lhs += v * s1.x[j];
        if (row.rel == Relation::Eq)
          CHECK(std::fabs(lhs - row.rhs) <= 1e-7);
        else
          CHECK(lhs <= row.rhs + 1e-7);
      }
      for (int j = 0; j < n; ++j) {
        CHECK(s1.x[j] >= lp.lower[j] - 1e-7);
        CHECK(s1.x[j] <= lp.upper[j] + 1e-7);
      }
      CHECK(std::fabs(s1.objective - dual_bound(lp, s1)) <= 1e-6);
    }
  }
  CHECK(optimal_seen >= 20);
}

TEST_CASE("dual warm start agrees with cold solve after bound change") {
  std::mt19937_64 rng(test_seed() + 7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 12, m = 8;
    LinearProgram lp;
    for (int j = 0; j < n; ++j) lp.add_var(0.0, 1.0, coef(rng));
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < n; ++j) {
        double v = coef(rng);
        if (std::fabs(v) > 0.8) terms.push_back({j, v});
      }
      if (terms.empty()) terms.push_back({i % n, 1.0});
      lp.add_row(Relation::Le, 1.0 + std::fabs(coef(rng)), std::move(terms));
    }
    LpSolver solver;
    auto root = solver.solve(lp);
    if (root.status != LpStatus::Optimal) continue;
    LpBasis basis = solver.last_basis();

    LinearProgram child = lp;
    int fix = trial % n;
    child.lower[fix] = child.upper[fix] = trial % 2 ? 1.0 : 0.0;

    LpSolver warm;
    auto w = warm.resolve(child, basis);
    auto cold = solve_lp(child);
    REQUIRE(w.status == cold.status);
    if (w.status == LpStatus::Optimal)
      CHECK(w.objective == doctest::Approx(cold.objective).epsilon(1e-7));
  }
}
