#include "dipps/nonlinear.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "dipps/lp.hpp"

#ifdef DIPPS_HAVE_OPENMP
#include <omp.h>
#endif

namespace dipps {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kScreenTol = 1e-7;
}  // namespace

double ResidualReport::at(const std::string& name, int step) const {
  for (const auto& e : entries)
    if (e.step == step && e.name == name) return e.value;
  return 0.0;
}

double step_buy_aggregate(const DispatchStep& s) {
  return s.p_g_es * (1.0 - s.b_v) * s.b_c + s.p_g_l;  // P^G_B
}

double step_sell_aggregate(const DispatchStep& s) {
  return s.p_es_g * (1.0 - s.b_c) + s.p_pv_g;  // P^S_G
}

double cost_j1(const DispatchSchedule& schedule, const TariffSchedule& tariff,
               double dt_hours) {
  double total = 0.0;
  for (size_t t = 0; t < schedule.steps.size(); ++t) {
    const DispatchStep& s = schedule.steps[t];
    total += dt_hours * (tariff.buy_price[t] * step_buy_aggregate(s) * s.b_g -
                         tariff.sell_price[t] * step_sell_aggregate(s) *
                             (1.0 - s.b_g));
  }
  return total;
}

TariffSchedule slice_tariff(const Scenario& sc, int start_step, int steps) {
  TariffSchedule out;
  out.buy_price.reserve(steps);
  out.sell_price.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    out.buy_price.push_back(sc.buy_at(start_step + k));
    out.sell_price.push_back(sc.sell_at(start_step + k));
  }
  return out;
}

ResidualReport evaluate_constraints(const DispatchSchedule& schedule,
                                    const Scenario& sc,
                                    const WindowSpec& window,
                                    const TerminalSpec& terminal) {
  ResidualReport rep;
  const EssParams& ess = sc.params().ess;
  const double dt = sc.dt();
  const double cap = ess.capacity_kwh;
  const int n = static_cast<int>(schedule.steps.size());
  auto push = [&rep](const char* name, int step, double v) {
    rep.entries.push_back({name, step, v});
    rep.max_residual = std::max(rep.max_residual, v);
  };

  if (static_cast<int>(schedule.soc_trajectory.size()) == n + 1)
    push("soc_initial", 0,
         std::fabs(schedule.soc_trajectory[0] - window.soc_start));

  const double discharge_soc_rate =
      ess.efficiency_convention == EfficiencyConvention::Paper
          ? ess.eta_d
          : 1.0 / ess.eta_d;

  for (int t = 0; t < n; ++t) {
    const DispatchStep& s = schedule.steps[t];
    const double load = sc.load_at(window.start_step + t);
    const double pv = sc.pv_at(window.start_step + t);

    double bin = 0.0;
    for (double b : {s.b_v, s.b_g, s.b_c})
      bin = std::max(bin, std::fabs(b - std::round(b)));
    push("binary_domain", t, bin);

    double nonneg = 0.0;
    for (double f : {s.p_g_l, s.p_g_es, s.p_es_l, s.p_es_g, s.p_pv_g,
                     s.p_pv_es, s.p_pv_l})
      nonneg = std::max(nonneg, -f);
    push("flow_nonneg", t, std::max(0.0, nonneg));

    push("eq2_load_balance", t,
         std::fabs(load - (s.p_g_l * s.b_g + s.p_es_l * (1.0 - s.b_c) +
                           s.p_pv_l)));
    push("eq3_pv_balance", t,
         std::fabs(pv - (s.p_pv_g * (1.0 - s.b_g) + s.p_pv_l +
                         s.p_pv_es * s.b_v * s.b_c)));

    const double c_agg = s.p_g_es * s.b_g * (1.0 - s.b_v) + s.p_pv_es * s.b_v;
    const double d_agg = s.p_es_g * (1.0 - s.b_g) + s.p_es_l;
    push("eq6_charge_cap", t, std::max(0.0, c_agg - ess.p_charge_max_kw));
    push("eq6_discharge_cap", t, std::max(0.0, d_agg - ess.p_discharge_max_kw));

    const double expected = ess.eta_c * c_agg * s.b_c -
                            discharge_soc_rate * d_agg * (1.0 - s.b_c);
    if (static_cast<int>(schedule.soc_trajectory.size()) == n + 1) {
      double soc_t = schedule.soc_trajectory[t];
      double soc_n = schedule.soc_trajectory[t + 1];
      push("eq5_soc_update", t, std::fabs(soc_n - soc_t - expected * dt / cap));
      push("soc_link", t, std::fabs(soc_n - s.soc_next));
    }

    const double buy_eff = step_buy_aggregate(s) * s.b_g;
    const double sell_eff = step_sell_aggregate(s) * (1.0 - s.b_g);
    push("eq7_buy_limit", t,
         std::max(0.0, buy_eff - sc.params().grid_limit_kw));
    push("eq7_sell_limit", t,
         std::max(0.0, sell_eff - sc.params().grid_limit_kw));
  }

  for (size_t i = 0; i < schedule.soc_trajectory.size(); ++i) {
    double v = schedule.soc_trajectory[i];
    push("soc_lower", static_cast<int>(i), std::max(0.0, ess.soc_min - v));
    push("soc_upper", static_cast<int>(i), std::max(0.0, v - ess.soc_max));
  }
  if (terminal.pin_step >= 0 &&
      terminal.pin_step < static_cast<int>(schedule.soc_trajectory.size()))
    push("soc_terminal", terminal.pin_step,
         std::fabs(schedule.soc_trajectory[terminal.pin_step] -
                   terminal.pin_value));
  if (terminal.end_min >= 0.0 && !schedule.soc_trajectory.empty())
    push("soc_end_min", n,
         std::max(0.0, terminal.end_min - schedule.soc_trajectory.back()));
  return rep;
}

ResidualReport evaluate_constraints(const DispatchSchedule& schedule,
                                    const Scenario& sc) {
  WindowSpec w{0, static_cast<int>(schedule.steps.size()),
               sc.params().ess.soc_initial};
  TerminalSpec t;
  t.pin_step = static_cast<int>(schedule.steps.size());
  t.pin_value = sc.params().ess.soc_final_target;
  return evaluate_constraints(schedule, sc, w, t);
}

// ---------------------------------------------------------------------------
// Enumeration baseline
// ---------------------------------------------------------------------------

namespace {

struct WindowData {
  int n = 0;
  double dt = 1.0;
  std::vector<double> load, pv, buy, sell;
  std::vector<int> mask;
  double bonus = 0.0;
  bool dynamic = false;
  double chg_max = 0.0, dis_max = 0.0, glim = 0.0;
  double soc_min = 0.0, soc_max = 1.0, soc0 = 0.5;
  double gain_c = 0.0;   // soc gained per kWh charged
  double drain_c = 0.0;  // soc lost per kWh discharged
  TerminalSpec term;
  std::vector<double> gain_pre, drain_pre;  // forward reachability sums
};

WindowData make_window_data(const Scenario& sc, const WindowSpec& w,
                            const TerminalSpec& term, ObjectiveKind obj) {
  WindowData d;
  const EssParams& ess = sc.params().ess;
  d.n = w.steps;
  d.dt = sc.dt();
  d.chg_max = ess.p_charge_max_kw;
  d.dis_max = ess.p_discharge_max_kw;
  d.glim = sc.params().grid_limit_kw;
  d.soc_min = ess.soc_min;
  d.soc_max = ess.soc_max;
  d.soc0 = w.soc_start;
  d.gain_c = ess.eta_c * d.dt / ess.capacity_kwh;
  d.drain_c = (ess.efficiency_convention == EfficiencyConvention::Paper
                   ? ess.eta_d
                   : 1.0 / ess.eta_d) *
              d.dt / ess.capacity_kwh;
  d.term = term;
  d.bonus = sc.mask().bonus_weight;
  d.dynamic = obj == ObjectiveKind::Dynamic;
  d.load.resize(d.n);
  d.pv.resize(d.n);
  d.buy.resize(d.n);
  d.sell.resize(d.n);
  d.mask.resize(d.n);
  for (int k = 0; k < d.n; ++k) {
    int t = w.start_step + k;
    d.load[k] = sc.load_at(t);
    d.pv[k] = sc.pv_at(t);
    d.buy[k] = sc.buy_at(t);
    d.sell[k] = sc.sell_at(t);
    d.mask[k] = sc.mask_at(t);
  }
  d.gain_pre.assign(d.n + 1, 0.0);
  d.drain_pre.assign(d.n + 1, 0.0);
  for (int k = 0; k < d.n; ++k) {
    double g = d.gain_c * std::min(d.chg_max, std::max(d.glim, d.pv[k]));
    double dr = d.drain_c * std::min(d.dis_max, d.load[k] + d.glim);
    d.gain_pre[k + 1] = d.gain_pre[k] + g;
    d.drain_pre[k + 1] = d.drain_pre[k] + dr;
  }
  return d;
}

struct AssignmentLp {
  LinearProgram lp;
  std::vector<int> v_g_l, v_g_es, v_es_l, v_es_g, v_pv_g, v_pv_es, v_pv_l;
  std::vector<int> v_soc;  // n+1
};

inline int triple_bv(int v) { return (v >> 2) & 1; }
inline int triple_bg(int v) { return (v >> 1) & 1; }
inline int triple_bc(int v) { return v & 1; }

// The MINLP with binaries substituted: products collapse to linear terms and
// flows whose gate chain is off drop out entirely.
AssignmentLp build_assignment_lp(const WindowData& d,
                                 const std::vector<int>& assign) {
  AssignmentLp out;
  LinearProgram& lp = out.lp;
  const int n = d.n;
  out.v_g_l.assign(n, -1);
  out.v_g_es.assign(n, -1);
  out.v_es_l.assign(n, -1);
  out.v_es_g.assign(n, -1);
  out.v_pv_g.assign(n, -1);
  out.v_pv_es.assign(n, -1);
  out.v_pv_l.assign(n, -1);
  out.v_soc.assign(n + 1, -1);

  for (int k = 0; k <= n; ++k) {
    double lo = d.soc_min, up = d.soc_max;
    if (k == 0) lo = up = d.soc0;
    if (k == d.term.pin_step) lo = up = d.term.pin_value;
    if (k == n && d.term.end_min >= 0.0) lo = std::max(lo, d.term.end_min);
    out.v_soc[k] = lp.add_var(lo, up, 0.0);
  }

  for (int k = 0; k < n; ++k) {
    int a = assign[k];
    int bv = triple_bv(a), bg = triple_bg(a), bc = triple_bc(a);
    double cbuy = d.dt * d.buy[k];
    double csell = -d.dt * d.sell[k];
    if (d.dynamic && d.mask[k]) csell -= d.dt * d.bonus;

    out.v_pv_l[k] = lp.add_var(0.0, std::min(d.pv[k], d.load[k]), 0.0);
    if (bg) out.v_g_l[k] = lp.add_var(0.0, d.glim, cbuy);
    if (!bc) out.v_es_l[k] = lp.add_var(0.0, d.dis_max, 0.0);
    if (!bc && !bg)
      out.v_es_g[k] = lp.add_var(0.0, std::min(d.dis_max, d.glim), csell);
    if (!bg) out.v_pv_g[k] = lp.add_var(0.0, std::min(d.pv[k], d.glim), csell);
    if (bg && !bv && bc)
      out.v_g_es[k] = lp.add_var(0.0, std::min(d.chg_max, d.glim), cbuy);
    if (bv && bc)
      out.v_pv_es[k] = lp.add_var(0.0, std::min(d.pv[k], d.chg_max), 0.0);

    {  // load balance, Eq. (2) collapsed
      std::vector<std::pair<int, double>> terms;
      terms.push_back({out.v_pv_l[k], 1.0});
      if (out.v_g_l[k] >= 0) terms.push_back({out.v_g_l[k], 1.0});
      if (out.v_es_l[k] >= 0) terms.push_back({out.v_es_l[k], 1.0});
      lp.add_row(Relation::Eq, d.load[k], std::move(terms));
    }
    {  // pv balance, Eq. (3) collapsed
      std::vector<std::pair<int, double>> terms;
      terms.push_back({out.v_pv_l[k], 1.0});
      if (out.v_pv_g[k] >= 0) terms.push_back({out.v_pv_g[k], 1.0});
      if (out.v_pv_es[k] >= 0) terms.push_back({out.v_pv_es[k], 1.0});
      lp.add_row(Relation::Eq, d.pv[k], std::move(terms));
    }
    if (out.v_es_l[k] >= 0 && out.v_es_g[k] >= 0)
      lp.add_row(Relation::Le, d.dis_max,
                 {{out.v_es_l[k], 1.0}, {out.v_es_g[k], 1.0}});
    if (out.v_g_l[k] >= 0 && out.v_g_es[k] >= 0)
      lp.add_row(Relation::Le, d.glim,
                 {{out.v_g_l[k], 1.0}, {out.v_g_es[k], 1.0}});
    if (out.v_es_g[k] >= 0 && out.v_pv_g[k] >= 0)
      lp.add_row(Relation::Le, d.glim,
                 {{out.v_es_g[k], 1.0}, {out.v_pv_g[k], 1.0}});
    {  // soc recursion
      std::vector<std::pair<int, double>> terms;
      terms.push_back({out.v_soc[k + 1], 1.0});
      terms.push_back({out.v_soc[k], -1.0});
      int vchg = bv ? out.v_pv_es[k] : out.v_g_es[k];
      if (bc && vchg >= 0) terms.push_back({vchg, -d.gain_c});
      if (!bc) {
        if (out.v_es_l[k] >= 0) terms.push_back({out.v_es_l[k], d.drain_c});
        if (out.v_es_g[k] >= 0) terms.push_back({out.v_es_g[k], d.drain_c});
      }
      lp.add_row(Relation::Eq, 0.0, std::move(terms));
    }
  }
  return out;
}

struct EnumBest {
  bool found = false;
  double obj = kInf;
  std::uint64_t bits = 0;
  std::vector<double> x;
  std::vector<int> assign;
};

struct EnumCtx {
  LpSolver solver;
  EnumBest best;
  long lps = 0;
  long iters = 0;
  long screened = 0;
  long breakdowns = 0;
};

long pow8(int e) {
  long r = 1;
  while (e-- > 0) r *= 8;
  return r;
}

// Conservative per-step screens: may only reject provably infeasible
// assignments.  The LP at the leaf stays the authority.
bool screen_step(const WindowData& d, int k, int a, double lo, double hi,
                 double& nlo, double& nhi) {
  int bv = triple_bv(a), bg = triple_bg(a), bc = triple_bc(a);
  double supply = d.pv[k] + (bg ? d.glim : 0.0) + (!bc ? d.dis_max : 0.0);
  if (supply < d.load[k] - kScreenTol) return false;
  double absorb =
      d.load[k] + (!bg ? d.glim : 0.0) + (bv && bc ? d.chg_max : 0.0);
  if (absorb < d.pv[k] - kScreenTol) return false;

  if (bc) {
    double rate = bv ? std::min(d.chg_max, d.pv[k])
                     : (bg ? std::min(d.chg_max, d.glim) : 0.0);
    nlo = lo;
    nhi = hi + d.gain_c * rate;
  } else {
    double sink = d.load[k] + (bg ? 0.0 : d.glim);
    double rate = std::min(d.dis_max, sink);
    nlo = lo - d.drain_c * rate;
    nhi = hi;
  }
  nlo = std::max(nlo, d.soc_min);
  nhi = std::min(nhi, d.soc_max);
  if (k + 1 == d.term.pin_step) {
    nlo = std::max(nlo, d.term.pin_value - kScreenTol);
    nhi = std::min(nhi, d.term.pin_value + kScreenTol);
  }
  if (k + 1 == d.n && d.term.end_min >= 0.0)
    nlo = std::max(nlo, d.term.end_min - kScreenTol);
  if (nlo > nhi + 1e-12) return false;

  if (d.term.pin_step > k + 1) {
    double gmax = d.gain_pre[d.term.pin_step] - d.gain_pre[k + 1];
    double dmax = d.drain_pre[d.term.pin_step] - d.drain_pre[k + 1];
    if (nlo - dmax > d.term.pin_value + kScreenTol) return false;
    if (nhi + gmax < d.term.pin_value - kScreenTol) return false;
  }
  if (d.term.end_min >= 0.0 && k + 1 < d.n) {
    double gmax = d.gain_pre[d.n] - d.gain_pre[k + 1];
    if (nhi + gmax < d.term.end_min - kScreenTol) return false;
  }
  return true;
}

void enum_dfs(const WindowData& d, int level, double lo, double hi,
              std::uint64_t bits, std::vector<int>& assign, EnumCtx& ctx) {
  if (level == d.n) {
    AssignmentLp alp = build_assignment_lp(d, assign);
    LpSolution sol = ctx.solver.solve(alp.lp);
    ++ctx.lps;
    ctx.iters += sol.iterations;
    if (sol.status == LpStatus::NumericalBreakdown ||
        sol.status == LpStatus::Unbounded) {
      ++ctx.breakdowns;
      return;
    }
    if (sol.status != LpStatus::Optimal) return;
    // DFS visits bit strings in ascending order, so requiring strict
    // improvement keeps the lexicographically smallest tie winner.
    if (!ctx.best.found || sol.objective < ctx.best.obj) {
      ctx.best.found = true;
      ctx.best.obj = sol.objective;
      ctx.best.bits = bits;
      ctx.best.x = sol.x;
      ctx.best.assign = assign;
    }
    return;
  }
  for (int a = 0; a < 8; ++a) {
    double nlo, nhi;
    if (!screen_step(d, level, a, lo, hi, nlo, nhi)) {
      ctx.screened += pow8(d.n - level - 1);
      continue;
    }
    assign[level] = a;
    enum_dfs(d, level + 1, nlo, nhi, (bits << 3) | static_cast<unsigned>(a),
             assign, ctx);
  }
}

DispatchSchedule schedule_from_assignment(const WindowData& d,
                                          const EnumBest& best) {
  AssignmentLp alp = build_assignment_lp(d, best.assign);
  DispatchSchedule sched;
  sched.steps.resize(d.n);
  sched.soc_trajectory.resize(d.n + 1);
  auto val = [&](int idx) { return idx >= 0 ? best.x[idx] : 0.0; };
  for (int k = 0; k <= d.n; ++k)
    sched.soc_trajectory[k] = best.x[alp.v_soc[k]];
  for (int k = 0; k < d.n; ++k) {
    DispatchStep& s = sched.steps[k];
    int a = best.assign[k];
    s.b_v = triple_bv(a);
    s.b_g = triple_bg(a);
    s.b_c = triple_bc(a);
    s.p_g_l = val(alp.v_g_l[k]);
    s.p_g_es = val(alp.v_g_es[k]);
    s.p_es_l = val(alp.v_es_l[k]);
    s.p_es_g = val(alp.v_es_g[k]);
    s.p_pv_g = val(alp.v_pv_g[k]);
    s.p_pv_es = val(alp.v_pv_es[k]);
    s.p_pv_l = val(alp.v_pv_l[k]);
    s.soc_next = sched.soc_trajectory[k + 1];
  }
  return sched;
}

}  // namespace

EnumerateResult solve_minlp_enumerate(const Scenario& scenario,
                                      const WindowSpec& window,
                                      const TerminalSpec& terminal,
                                      const EnumerateOptions& options) {
  EnumerateResult res;
  const int n = window.steps;
  const int guard = std::min(options.guard_exponent, 24);
  if (n < 1 || 3 * n > guard) {
    res.status = SolveStatus::WindowTooLarge;
    return res;
  }
  auto t0 = std::chrono::steady_clock::now();
  WindowData d =
      make_window_data(scenario, window, terminal, options.objective);
  res.assignments_total = pow8(n);

  if (d.term.pin_step == 0 &&
      std::fabs(d.soc0 - d.term.pin_value) > kScreenTol) {
    res.status = SolveStatus::Infeasible;
    return res;
  }

  std::vector<EnumCtx> ctxs;
#ifdef DIPPS_HAVE_OPENMP
  int workers = std::max(1, options.workers);
  if (workers > 1 && n >= 2) {
    // enumerate two-level prefixes serially, fan the subtrees out
    struct Prefix {
      double lo, hi;
      std::uint64_t bits;
      int a0, a1;
    };
    std::vector<Prefix> prefixes;
    long screened0 = 0;
    for (int a0 = 0; a0 < 8; ++a0) {
      double l1, h1;
      if (!screen_step(d, 0, a0, d.soc0, d.soc0, l1, h1)) {
        screened0 += pow8(n - 1);
        continue;
      }
      for (int a1 = 0; a1 < 8; ++a1) {
        double l2, h2;
        if (!screen_step(d, 1, a1, l1, h1, l2, h2)) {
          screened0 += pow8(n - 2);
          continue;
        }
        prefixes.push_back(
            {l2, h2, (static_cast<std::uint64_t>(a0) << 3) | a1, a0, a1});
      }
    }
    std::vector<EnumCtx> locals(prefixes.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (int p = 0; p < static_cast<int>(prefixes.size()); ++p) {
      const Prefix& pf = prefixes[p];
      std::vector<int> assign(n, 0);
      assign[0] = pf.a0;
      assign[1] = pf.a1;
      enum_dfs(d, 2, pf.lo, pf.hi, pf.bits, assign, locals[p]);
    }
    EnumCtx merged;
    merged.screened = screened0;
    for (auto& c : locals) {
      merged.lps += c.lps;
      merged.iters += c.iters;
      merged.screened += c.screened;
      merged.breakdowns += c.breakdowns;
      if (c.best.found &&
          (!merged.best.found || c.best.obj < merged.best.obj ||
           (c.best.obj == merged.best.obj && c.best.bits < merged.best.bits)))
        merged.best = std::move(c.best);
    }
    ctxs.push_back(std::move(merged));
  }
#endif
  if (ctxs.empty()) {
    ctxs.emplace_back();
    std::vector<int> assign(n, 0);
    enum_dfs(d, 0, d.soc0, d.soc0, 0, assign, ctxs[0]);
  }

  EnumCtx& c = ctxs[0];
  res.stats.nodes_explored = c.lps;
  res.stats.lp_iterations = c.iters;
  res.assignments_screened = c.screened;
  if (c.best.found) {
    res.status = SolveStatus::Optimal;
    res.stats.objective = c.best.obj;
    res.schedule = schedule_from_assignment(d, c.best);
  } else {
    res.status = c.breakdowns > 0 ? SolveStatus::NumericalBreakdown
                                  : SolveStatus::Infeasible;
  }
  res.stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

}  // namespace dipps
