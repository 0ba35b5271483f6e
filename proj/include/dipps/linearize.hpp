#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dipps/domain.hpp"
#include "dipps/lp.hpp"
#include "dipps/nonlinear.hpp"

namespace dipps {

// Bookkeeping for one lifted product variable z = x * gate.
struct LiftedVar {
  std::string name;   // e.g. "w_g_es"
  int step = 0;
  int lifted = -1;    // variable index of z
  int base = -1;      // variable index of x
  int gate = -1;      // binary variable index
  bool complement = false;  // gate enters as (1 - b)
  double upper_bound = 0.0;
};

// Mixed-integer encoding of one scheduling window.  Per step the layout is
// 7 flows + 14 lifted/aggregate variables + 3 binaries, followed by the
// steps+1 SoC variables.
struct MilpProblem {
  LinearProgram lp;
  std::vector<int> binaries;  // step-major, (b_v, b_g, b_c) within a step
  std::vector<LiftedVar> lifts;
  std::vector<std::string> var_names;
  std::unordered_map<std::string, int> name_to_var;

  int steps = 0;
  int start_step = 0;
  double dt = 1.0;

  static constexpr int kPerStep = 24;
  enum Var {
    PGL = 0, PGES, PESL, PESG, PPVG, PPVES, PPVL,
    ZGES, YGES, WGES, WGL, YESG, WESG, WPVG, YPVES, WPVES, WESL,
    YCES, YESD, YGB, YSG,
    BV, BG, BC,
  };
  int var(int step, Var v) const { return step * kPerStep + static_cast<int>(v); }
  int soc_var(int k) const { return steps * kPerStep + k; }

  // One constraint per line, variables by name; for debugging.
  std::string to_text() const;
};

// Appends z with envelope rows  z <= U*g, z <= x, z >= x - U*(1-g)
// (z >= 0 via its bound); `complement` swaps g for (1-b).  For an integral
// gate the envelope pins z = x*g exactly.  Throws std::invalid_argument when
// `upper` is not finite ("UnboundedVariable").
int lift_product(LinearProgram& lp, int x_var, int gate_var, bool complement,
                 double upper);

MilpProblem build_milp(const Scenario& scenario, const WindowSpec& window,
                       const TerminalSpec& terminal, ObjectiveKind objective);

struct RecoverResult {
  bool ok = false;
  DispatchSchedule schedule;
  std::string bad_lift;  // set on LiftInconsistency
  int bad_step = -1;
};

// Reads the original flow variables back from an integral-feasible solution.
// Every lift is checked (|z - x*g| <= 1e-6, signalling a solver bug
// otherwise) and flows whose gate chain is off are zeroed, so the returned
// schedule uses raw flows that coincide with the effective ones.
RecoverResult recover_schedule(const MilpProblem& problem,
                               const std::vector<double>& x);

}  // namespace dipps
