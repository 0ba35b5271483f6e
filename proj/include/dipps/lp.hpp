#pragma once

#include <utility>
#include <vector>

namespace dipps {

enum class Relation : char { Le, Eq };

// Box-bounded linear program: min c'x subject to rows (<= or =) and
// l <= x <= u with finite bounds on every structural variable.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> c;
  std::vector<double> lower;
  std::vector<double> upper;

  struct Row {
    std::vector<std::pair<int, double>> terms;
    Relation rel = Relation::Le;
    double rhs = 0.0;
  };
  std::vector<Row> rows;

  int add_var(double lo, double up, double cost = 0.0) {
    lower.push_back(lo);
    upper.push_back(up);
    c.push_back(cost);
    return num_vars++;
  }
  void add_row(Relation rel, double rhs,
               std::vector<std::pair<int, double>> terms) {
    rows.push_back(Row{std::move(terms), rel, rhs});
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalBreakdown };

struct LpSolution {
  LpStatus status = LpStatus::NumericalBreakdown;
  std::vector<double> x;  // structural variable values
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> row_duals;      // y, one per row
  std::vector<double> reduced_costs;  // c - A'y for structural variables
};

// All numeric thresholds in one place.
struct LpTolerances {
  double feasibility = 1e-7;
  double optimality = 1e-7;
  double pivot = 1e-11;
};

// Basis snapshot for warm starts.  Valid across solves of the same problem
// structure (identical rows and variables); bounds may change.
struct LpBasis {
  std::vector<int> basic;           // per row: variable basic in it
  std::vector<signed char> vstate;  // per column: 0 lower, 1 upper, 2 basic
  bool valid() const { return !basic.empty(); }
};

// Bounded-variable revised simplex with a dense basis inverse.
// Deterministic: Dantzig pricing with lowest-index tie breaks, switching to
// Bland's rule after a degeneracy streak.  Instances are single-threaded;
// run one per worker.
class LpSolver {
 public:
  explicit LpSolver(LpTolerances tol = LpTolerances{}) : tol_(tol) {}

  // Cold start, two-phase primal.
  LpSolution solve(const LinearProgram& lp);

  // Dual-simplex reoptimization from a basis of a structurally identical
  // program (e.g. after bound changes).  Falls back to a cold solve when the
  // basis cannot be reused.
  LpSolution resolve(const LinearProgram& lp, const LpBasis& start);

  const LpBasis& last_basis() const { return out_basis_; }

 private:
  struct Col {  // sparse column of the augmented matrix
    int begin = 0, end = 0;
  };

  void load(const LinearProgram& lp);
  void densify(int j, std::vector<double>& out) const;
  bool refactor();
  void compute_xb();
  void compute_duals(const std::vector<double>& cost);
  double nonbasic_value(int j) const;
  LpSolution finish(const LinearProgram& lp, LpStatus st, int iters,
                    const std::vector<double>& cost);
  int price(const std::vector<double>& cost, bool bland) const;
  LpStatus primal_loop(const std::vector<double>& cost, int& iters,
                       bool phase_one);
  LpStatus dual_loop(const std::vector<double>& cost, int& iters);
  void pivot(int enter, int row);
  void snapshot();

  LpTolerances tol_;
  LpBasis out_basis_;

  // problem layout
  int m_ = 0, n_struct_ = 0, n_slack_ = 0, n_total_ = 0;
  std::vector<double> lo_, up_;          // per augmented column
  std::vector<int> slack_row_;           // slack column -> row
  std::vector<double> art_sign_;         // artificial column sign (per row)
  std::vector<int> col_index_;           // structural sparse storage
  std::vector<double> col_value_;
  std::vector<Col> cols_;
  std::vector<double> rhs_;

  // simplex state
  std::vector<int> basic_;
  std::vector<signed char> vstate_;  // 0 lower, 1 upper, 2 basic
  std::vector<double> xb_;
  std::vector<double> binv_;  // m x m row-major
  std::vector<double> y_, d_;
  std::vector<double> work_col_, work_row_;
  int pivots_since_refactor_ = 0;
};

// One-shot convenience wrapper.
LpSolution solve_lp(const LinearProgram& lp, LpTolerances tol = LpTolerances{});

}  // namespace dipps
