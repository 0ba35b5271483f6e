#pragma once

namespace dipps {

enum class SolveStatus {
  Optimal,
  Infeasible,
  WindowTooLarge,
  NodeLimitExceeded,
  NumericalBreakdown,
};

struct SolveStats {
  double wall_time_s = 0.0;
  long nodes_explored = 0;  // B&B nodes, or LPs solved by the enumerator
  long lp_iterations = 0;
  double objective = 0.0;
  double gap = 0.0;
};

}  // namespace dipps
