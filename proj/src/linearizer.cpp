#include "dipps/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dipps {

int lift_product(LinearProgram& lp, int x_var, int gate_var, bool complement,
                 double upper) {
  if (!std::isfinite(upper) || upper <= 0.0)
    throw std::invalid_argument("UnboundedVariable: lift needs finite U > 0");
  int z = lp.add_var(0.0, upper, 0.0);
  if (!complement) {
    lp.add_row(Relation::Le, 0.0, {{z, 1.0}, {gate_var, -upper}});   // z <= U b
    lp.add_row(Relation::Le, 0.0, {{z, 1.0}, {x_var, -1.0}});        // z <= x
    lp.add_row(Relation::Le, upper,
               {{x_var, 1.0}, {z, -1.0}, {gate_var, upper}});        // z >= x-U(1-b)
  } else {
    lp.add_row(Relation::Le, upper, {{z, 1.0}, {gate_var, upper}});  // z <= U(1-b)
    lp.add_row(Relation::Le, 0.0, {{z, 1.0}, {x_var, -1.0}});        // z <= x
    lp.add_row(Relation::Le, 0.0,
               {{x_var, 1.0}, {z, -1.0}, {gate_var, -upper}});       // z >= x-U b
  }
  return z;
}

namespace {

const char* kVarNames[MilpProblem::kPerStep] = {
    "p_g_l", "p_g_es", "p_es_l", "p_es_g", "p_pv_g", "p_pv_es", "p_pv_l",
    "z_g_es", "y_g_es", "w_g_es", "w_g_l", "y_es_g", "w_es_g", "w_pv_g",
    "y_pv_es", "w_pv_es", "w_es_l", "y_c_es", "y_es_d", "y_g_b", "y_s_g",
    "b_v", "b_g", "b_c"};

}  // namespace

MilpProblem build_milp(const Scenario& sc, const WindowSpec& window,
                       const TerminalSpec& terminal, ObjectiveKind objective) {
  MilpProblem p;
  const EssParams& ess = sc.params().ess;
  const double glim = sc.params().grid_limit_kw;
  const double chg = ess.p_charge_max_kw;
  const double dis = ess.p_discharge_max_kw;
  const double dt = sc.dt();
  const int n = window.steps;
  p.steps = n;
  p.start_step = window.start_step;
  p.dt = dt;

  double pv_peak = 0.0;
  for (int k = 0; k < n; ++k)
    pv_peak = std::max(pv_peak, sc.pv_at(window.start_step + k));
  // envelope bound for PV-sourced lifts; must stay positive even on
  // all-dark windows (the balances already force those flows to zero)
  const double u_pv = pv_peak > 0.0 ? pv_peak : 1.0;

  const double u_ges = std::min(chg, glim);
  const double u_esg = std::min(dis, glim);
  const double u_pvg = std::min(u_pv, glim);
  const double u_pves = std::min(u_pv, chg);

  const double soc_rate_c = ess.eta_c * dt / ess.capacity_kwh;
  const double soc_rate_d =
      (ess.efficiency_convention == EfficiencyConvention::Paper
           ? ess.eta_d
           : 1.0 / ess.eta_d) *
      dt / ess.capacity_kwh;

  LinearProgram& lp = p.lp;
  auto name = [&p](const std::string& s, int step) {
    p.var_names.push_back(s + "[" + std::to_string(step) + "]");
  };

  for (int k = 0; k < n; ++k) {
    const double load = sc.load_at(window.start_step + k);
    const double pv = sc.pv_at(window.start_step + k);
    const double buy = sc.buy_at(window.start_step + k);
    const double sell = sc.sell_at(window.start_step + k);
    const int masked = sc.mask_at(window.start_step + k);
    double sell_coef = -dt * sell;
    if (objective == ObjectiveKind::Dynamic && masked)
      sell_coef -= dt * sc.mask().bonus_weight;

    // flows
    lp.add_var(0.0, glim, 0.0);                       // PGL
    lp.add_var(0.0, u_ges, 0.0);                      // PGES
    lp.add_var(0.0, dis, 0.0);                        // PESL
    lp.add_var(0.0, u_esg, 0.0);                      // PESG
    lp.add_var(0.0, std::min(pv, glim), 0.0);         // PPVG
    lp.add_var(0.0, std::min(pv, chg), 0.0);          // PPVES
    lp.add_var(0.0, std::min(pv, load), 0.0);         // PPVL
    // lifted variables (bounds; envelope rows are added below once the
    // gates exist)
    for (int j = 0; j < 10; ++j) lp.add_var(0.0, 0.0, 0.0);
    lp.add_var(0.0, chg, 0.0);   // YCES, Eq. (6) charge cap
    lp.add_var(0.0, dis, 0.0);   // YESD, Eq. (6) discharge cap
    lp.add_var(0.0, glim, dt * buy);  // YGB
    lp.add_var(0.0, glim, sell_coef); // YSG
    lp.add_var(0.0, 1.0, 0.0);   // BV
    lp.add_var(0.0, 1.0, 0.0);   // BG
    lp.add_var(0.0, 1.0, 0.0);   // BC
    for (int j = 0; j < MilpProblem::kPerStep; ++j) name(kVarNames[j], k);
  }
  for (int k = 0; k <= n; ++k) {
    double lo = ess.soc_min, up = ess.soc_max;
    if (k == 0) lo = up = window.soc_start;
    if (k == terminal.pin_step) lo = up = terminal.pin_value;
    if (k == n && terminal.end_min >= 0.0) lo = std::max(lo, terminal.end_min);
    lp.add_var(lo, up, 0.0);
    p.var_names.push_back("soc[" + std::to_string(k) + "]");
  }

  using V = MilpProblem::Var;
  auto setb = [&lp](int var, double up) {
    lp.upper[var] = up;
  };

  for (int k = 0; k < n; ++k) {
    const double load = sc.load_at(window.start_step + k);
    const double pv = sc.pv_at(window.start_step + k);
    const int bv = p.var(k, V::BV);
    const int bg = p.var(k, V::BG);
    const int bc = p.var(k, V::BC);
    p.binaries.push_back(bv);
    p.binaries.push_back(bg);
    p.binaries.push_back(bc);

    // Chained lifts in published order: z -> y -> w.
    struct LiftSpec {
      V out;
      int base;
      int gate;
      bool comp;
      double upper;
      const char* label;
    };
    const LiftSpec specs[10] = {
        {V::ZGES, p.var(k, V::PGES), bv, true, u_ges, "z_g_es"},
        {V::YGES, p.var(k, V::ZGES), bc, false, u_ges, "y_g_es"},
        {V::WGES, p.var(k, V::YGES), bg, false, u_ges, "w_g_es"},
        {V::WGL, p.var(k, V::PGL), bg, false, glim, "w_g_l"},
        {V::YESG, p.var(k, V::PESG), bc, true, u_esg, "y_es_g"},
        {V::WESG, p.var(k, V::YESG), bg, true, u_esg, "w_es_g"},
        {V::WPVG, p.var(k, V::PPVG), bg, true, u_pvg, "w_pv_g"},
        {V::YPVES, p.var(k, V::PPVES), bc, false, u_pves, "y_pv_es"},
        {V::WPVES, p.var(k, V::YPVES), bv, false, u_pves, "w_pv_es"},
        {V::WESL, p.var(k, V::PESL), bc, true, dis, "w_es_l"},
    };
    for (const auto& s : specs) {
      int z = p.var(k, s.out);
      setb(z, s.upper);
      if (!s.comp) {
        lp.add_row(Relation::Le, 0.0, {{z, 1.0}, {s.gate, -s.upper}});
        lp.add_row(Relation::Le, 0.0, {{z, 1.0}, {s.base, -1.0}});
        lp.add_row(Relation::Le, s.upper,
                   {{s.base, 1.0}, {z, -1.0}, {s.gate, s.upper}});
      } else {
        lp.add_row(Relation::Le, s.upper, {{z, 1.0}, {s.gate, s.upper}});
        lp.add_row(Relation::Le, 0.0, {{z, 1.0}, {s.base, -1.0}});
        lp.add_row(Relation::Le, 0.0,
                   {{s.base, 1.0}, {z, -1.0}, {s.gate, -s.upper}});
      }
      p.lifts.push_back({s.label, k, z, s.base, s.gate, s.comp, s.upper});
    }

    // Eq. (11): both balances on lifted variables
    lp.add_row(Relation::Eq, load,
               {{p.var(k, V::WGL), 1.0},
                {p.var(k, V::WESL), 1.0},
                {p.var(k, V::PPVL), 1.0}});
    lp.add_row(Relation::Eq, pv,
               {{p.var(k, V::WPVG), 1.0},
                {p.var(k, V::WPVES), 1.0},
                {p.var(k, V::PPVL), 1.0}});
    // Eq. (12) aggregates
    lp.add_row(Relation::Eq, 0.0,
               {{p.var(k, V::YCES), 1.0},
                {p.var(k, V::WGES), -1.0},
                {p.var(k, V::WPVES), -1.0}});
    lp.add_row(Relation::Eq, 0.0,
               {{p.var(k, V::YESD), 1.0},
                {p.var(k, V::WESG), -1.0},
                {p.var(k, V::WESL), -1.0}});
    // Eq. (13) exchange aggregates, on the lifted w terms so the objective
    // coincides with the nonlinear cost at every integral point
    lp.add_row(Relation::Eq, 0.0,
               {{p.var(k, V::YGB), 1.0},
                {p.var(k, V::WGES), -1.0},
                {p.var(k, V::WGL), -1.0}});
    lp.add_row(Relation::Eq, 0.0,
               {{p.var(k, V::YSG), 1.0},
                {p.var(k, V::WESG), -1.0},
                {p.var(k, V::WPVG), -1.0}});
    // Eq. (12) SoC recursion
    lp.add_row(Relation::Eq, 0.0,
               {{p.soc_var(k + 1), 1.0},
                {p.soc_var(k), -1.0},
                {p.var(k, V::YCES), -soc_rate_c},
                {p.var(k, V::YESD), soc_rate_d}});
  }

  p.name_to_var.reserve(p.var_names.size());
  for (size_t i = 0; i < p.var_names.size(); ++i)
    p.name_to_var.emplace(p.var_names[i], static_cast<int>(i));
  return p;
}

RecoverResult recover_schedule(const MilpProblem& p,
                               const std::vector<double>& x) {
  RecoverResult out;
  const int n = p.steps;
  using V = MilpProblem::Var;

  for (const auto& lift : p.lifts) {
    double b = std::round(x[lift.gate]);
    double g = lift.complement ? 1.0 - b : b;
    if (std::fabs(x[lift.lifted] - x[lift.base] * g) > 1e-6) {
      out.bad_lift = lift.name;
      out.bad_step = lift.step;
      return out;
    }
  }

  out.ok = true;
  out.schedule.steps.resize(n);
  out.schedule.soc_trajectory.resize(n + 1);
  for (int k = 0; k <= n; ++k)
    out.schedule.soc_trajectory[k] = x[p.soc_var(k)];
  for (int k = 0; k < n; ++k) {
    DispatchStep& s = out.schedule.steps[k];
    double bv = std::round(x[p.var(k, V::BV)]);
    double bg = std::round(x[p.var(k, V::BG)]);
    double bc = std::round(x[p.var(k, V::BC)]);
    s.b_v = bv;
    s.b_g = bg;
    s.b_c = bc;
    // raw flows; a flow whose gate chain is off carries no power
    s.p_g_l = x[p.var(k, V::PGL)] * bg;
    s.p_g_es = x[p.var(k, V::PGES)] * bg * (1.0 - bv) * bc;
    s.p_es_l = x[p.var(k, V::PESL)] * (1.0 - bc);
    s.p_es_g = x[p.var(k, V::PESG)] * (1.0 - bc) * (1.0 - bg);
    s.p_pv_g = x[p.var(k, V::PPVG)] * (1.0 - bg);
    s.p_pv_es = x[p.var(k, V::PPVES)] * bc * bv;
    s.p_pv_l = x[p.var(k, V::PPVL)];
    s.soc_next = out.schedule.soc_trajectory[k + 1];
  }
  return out;
}

std::string MilpProblem::to_text() const {
  std::ostringstream os;
  os << "vars " << lp.num_vars << " rows " << lp.rows.size() << "\n";
  for (int j = 0; j < lp.num_vars; ++j) {
    os << "var " << var_names[j] << " in [" << lp.lower[j] << ", "
       << lp.upper[j] << "]";
    if (lp.c[j] != 0.0) os << " cost " << lp.c[j];
    os << "\n";
  }
  for (const auto& row : lp.rows) {
    bool first = true;
    for (auto [j, v] : row.terms) {
      if (!first && v >= 0.0) os << " + ";
      if (!first && v < 0.0) os << " - ";
      if (first && v < 0.0) os << "-";
      double av = std::fabs(v);
      if (av != 1.0) os << av << "*";
      os << var_names[j];
      first = false;
    }
    os << (row.rel == Relation::Eq ? " = " : " <= ") << row.rhs << "\n";
  }
  return os.str();
}

}  // namespace dipps
