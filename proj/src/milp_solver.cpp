#include "dipps/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

#ifdef DIPPS_HAVE_OPENMP
#include <omp.h>
#endif

namespace dipps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
  long id = 0;
  double bound = -kInf;
  std::vector<std::pair<int, int>> fixes;  // (binary var, 0/1)
  LpBasis basis;                            // parent-optimal basis
  int branch_var = -1;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

// Most fractional binary; ties to the earliest position in the published
// branching order (time step, then b_V, b_G, b_C).
int pick_branch_var(const MilpProblem& p, const std::vector<double>& x,
                    double int_tol) {
  int best = -1;
  double best_frac = int_tol;
  for (int b : p.binaries) {
    double v = x[b];
    double frac = std::min(v - std::floor(v), std::ceil(v) - v);
    frac = std::min(frac, std::fabs(v - std::round(v)));
    if (frac > best_frac) {
      best_frac = frac;
      best = b;
    }
  }
  return best;
}

void apply_fixes(LinearProgram& lp, const MilpProblem& p,
                 const std::vector<std::pair<int, int>>& fixes) {
  for (int b : p.binaries) {
    lp.lower[b] = 0.0;
    lp.upper[b] = 1.0;
  }
  for (auto [var, val] : fixes) {
    lp.lower[var] = val;
    lp.upper[var] = val;
  }
}

}  // namespace

MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& opt) {
  MilpResult res;
  auto t0 = std::chrono::steady_clock::now();

  LinearProgram lp = problem.lp;  // mutable bounds copy
  LpSolver solver;

  long next_id = 0;
  long nodes = 0;
  long iters = 0;
  bool hit_node_limit = false;
  bool numerical_trouble = false;

  double incumbent_obj = kInf;
  std::vector<double> incumbent_x;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;

  auto consider = [&](const LpSolution& sol,
                      std::vector<std::pair<int, int>> fixes,
                      const LpBasis& basis) {
    if (sol.status == LpStatus::Infeasible) return;
    if (sol.status != LpStatus::Optimal) {
      numerical_trouble = true;
      return;
    }
    if (sol.objective >= incumbent_obj - opt.gap_abs) return;  // bound prune
    int bvar = pick_branch_var(problem, sol.x, opt.int_tol);
    if (bvar < 0) {
      if (sol.objective < incumbent_obj - opt.improve_eps) {
        incumbent_obj = sol.objective;
        incumbent_x = sol.x;
        for (int b : problem.binaries) incumbent_x[b] = std::round(incumbent_x[b]);
      }
      return;
    }
    Node node;
    node.id = next_id++;
    node.bound = sol.objective;
    node.fixes = std::move(fixes);
    node.basis = basis;
    node.branch_var = bvar;
    open.push(std::move(node));
  };

  // root
  apply_fixes(lp, problem, {});
  LpSolution root = solver.solve(lp);
  ++nodes;
  iters += root.iterations;
  if (root.status == LpStatus::Infeasible) {
    res.status = SolveStatus::Infeasible;
    res.stats.nodes_explored = nodes;
    res.stats.lp_iterations = iters;
    res.stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return res;
  }
  if (root.status != LpStatus::Optimal) {
    res.status = SolveStatus::NumericalBreakdown;
    return res;
  }
  consider(root, {}, solver.last_basis());

  double best_open_bound = open.empty() ? incumbent_obj : open.top().bound;

  struct ChildTask {
    std::vector<std::pair<int, int>> fixes;
    LpBasis basis;
    long order;  // deterministic processing order
    LpSolution sol;
  };

  const int workers = std::max(1, opt.workers);
  while (!open.empty()) {
    if (incumbent_obj - open.top().bound <= opt.gap_abs) break;  // proven
    if (nodes >= opt.node_limit) {
      hit_node_limit = true;
      break;
    }

    // pop a batch of the best-bound nodes and evaluate their children
    std::vector<Node> batch;
    int take = workers;
    while (take-- > 0 && !open.empty()) {
      if (incumbent_obj - open.top().bound <= opt.gap_abs) break;
      batch.push_back(open.top());
      open.pop();
    }
    if (batch.empty()) break;

    std::vector<ChildTask> tasks;
    tasks.reserve(batch.size() * 2);
    long order = 0;
    for (const auto& node : batch) {
      for (int side = 0; side <= 1; ++side) {
        ChildTask t;
        t.fixes = node.fixes;
        t.fixes.emplace_back(node.branch_var, side);
        t.basis = node.basis;
        t.order = order++;
        tasks.push_back(std::move(t));
      }
    }

#ifdef DIPPS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers) \
    if (workers > 1)
#endif
    for (int i = 0; i < static_cast<int>(tasks.size()); ++i) {
      thread_local LpSolver local_solver;
      thread_local LinearProgram local_lp;
      LinearProgram* plp = &lp;
      LpSolver* psolver = &solver;
      if (workers > 1) {
        if (local_lp.num_vars != problem.lp.num_vars) local_lp = problem.lp;
        plp = &local_lp;
        psolver = &local_solver;
      }
      apply_fixes(*plp, problem, tasks[i].fixes);
      tasks[i].sol = psolver->resolve(*plp, tasks[i].basis);
      tasks[i].basis = psolver->last_basis();
    }

    // deterministic sequential processing in creation order
    for (auto& t : tasks) {
      ++nodes;
      iters += t.sol.iterations;
      consider(t.sol, std::move(t.fixes), t.basis);
    }
    best_open_bound = open.empty() ? incumbent_obj : open.top().bound;
  }

  res.stats.nodes_explored = nodes;
  res.stats.lp_iterations = iters;
  res.stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (incumbent_x.empty()) {
    if (hit_node_limit)
      res.status = SolveStatus::NodeLimitExceeded;
    else if (numerical_trouble)
      res.status = SolveStatus::NumericalBreakdown;
    else
      res.status = SolveStatus::Infeasible;
    return res;
  }
  res.status = hit_node_limit ? SolveStatus::NodeLimitExceeded
                              : SolveStatus::Optimal;
  res.x = std::move(incumbent_x);
  res.stats.objective = incumbent_obj;
  double remaining = open.empty() ? incumbent_obj : open.top().bound;
  res.stats.gap = std::max(0.0, incumbent_obj - remaining);
  return res;
}

}  // namespace dipps
