#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dipps/domain.hpp"
#include "dipps/stats.hpp"

namespace dipps {

// Scheduling window: steps [start_step, start_step + steps) of the scenario
// day, wrapping past the end.  soc_start is the state entering the window.
struct WindowSpec {
  int start_step = 0;
  int steps = 24;
  double soc_start = 0.5;
};

// Terminal state handling inside one window.
//  pin_step >= 0: soc after `pin_step` window steps is fixed to pin_value.
//  end_min >= 0: soc at the window end must be at least end_min.
struct TerminalSpec {
  int pin_step = -1;
  double pin_value = 0.5;
  double end_min = -1.0;
};

enum class ObjectiveKind { Static, Dynamic };

struct ResidualEntry {
  std::string name;
  int step = 0;
  double value = 0.0;
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;
  double max_residual = 0.0;
  double at(const std::string& name, int step) const;
};

// Absolute residuals of the original nonlinear constraint set (power
// balances, aggregate caps, SoC recursion and bounds, exchange limits,
// binary domains) for a candidate schedule.
ResidualReport evaluate_constraints(const DispatchSchedule& schedule,
                                    const Scenario& scenario,
                                    const WindowSpec& window,
                                    const TerminalSpec& terminal);

// Day-schedule convenience: window = whole day starting at soc_initial,
// terminal pinned to soc_final_target at the last step.
ResidualReport evaluate_constraints(const DispatchSchedule& schedule,
                                    const Scenario& scenario);

// Grid-exchange aggregates of one step (Eq.-style definitions on raw flows).
double step_buy_aggregate(const DispatchStep& s);   // P^G_B
double step_sell_aggregate(const DispatchStep& s);  // P^S_G

// Total tariff cost of a schedule: buys priced when b_g is on, sells
// credited when it is off.
double cost_j1(const DispatchSchedule& schedule, const TariffSchedule& tariff,
               double dt_hours = 1.0);

struct EnumerateOptions {
  int workers = 1;
  int guard_exponent = 18;  // reject when 3*steps exceeds this (hard cap 24)
  ObjectiveKind objective = ObjectiveKind::Static;
};

struct EnumerateResult {
  SolveStatus status = SolveStatus::Infeasible;
  DispatchSchedule schedule;
  SolveStats stats;
  long assignments_total = 0;
  long assignments_screened = 0;  // pruned without an LP solve
};

// Exact baseline: tries every assignment of (b_V, b_G, b_C) over the window;
// each assignment collapses the bilinear constraints to an LP.  Ties between
// equal-objective assignments go to the lexicographically smallest
// (b_V, b_G, b_C) bit string.
EnumerateResult solve_minlp_enumerate(const Scenario& scenario,
                                      const WindowSpec& window,
                                      const TerminalSpec& terminal,
                                      const EnumerateOptions& options = {});

// Tariff slice for a window (wrapping), useful for costing window schedules.
TariffSchedule slice_tariff(const Scenario& scenario, int start_step, int steps);

}  // namespace dipps
