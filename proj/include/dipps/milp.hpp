#pragma once

#include <vector>

#include "dipps/linearize.hpp"
#include "dipps/lp.hpp"
#include "dipps/stats.hpp"

namespace dipps {

struct MilpOptions {
  double gap_abs = 1e-6;        // absolute optimality gap at exit
  long node_limit = 1000000;
  int workers = 1;              // >1: batched node evaluation
  double int_tol = 1e-6;        // integrality tolerance on binaries
  double improve_eps = 1e-9;    // incumbent must improve strictly
};

struct MilpResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> x;  // full variable vector, binaries snapped to {0,1}
  SolveStats stats;
};

// Best-bound branch and bound over the binary variables, LP relaxations via
// the simplex core with dual warm starts.  Deterministic for fixed options;
// with workers > 1 the returned objective is still deterministic, the argmin
// only for a fixed worker count.
MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

}  // namespace dipps
