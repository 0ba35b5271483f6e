#include "dipps/domain.hpp"

#include <algorithm>
#include <sstream>

namespace dipps {

EssParams EssParams::with_defaults(double capacity_kwh) {
  EssParams p;
  p.capacity_kwh = capacity_kwh;
  p.p_charge_max_kw = 0.4 * capacity_kwh;
  p.p_discharge_max_kw = 0.2 * capacity_kwh;
  return p;
}

double Scenario::load_peak() const {
  double m = 0.0;
  for (double v : load_.values) m = std::max(m, v);
  return m;
}

double Scenario::pv_peak() const {
  double m = 0.0;
  for (double v : pv_.values) m = std::max(m, v);
  return m;
}

double default_grid_limit(const PowerProfile& load, const PowerProfile& pv) {
  double m = 0.0;
  for (double v : load.values) m = std::max(m, v);
  for (double v : pv.values) m = std::max(m, v);
  return 2.0 * m;
}

namespace {

bool finite(double v) { return std::isfinite(v); }

void check_series(const char* name, const std::vector<double>& v, int steps,
                  std::vector<ValidationError>& errs) {
  if (static_cast<int>(v.size()) != steps) {
    errs.push_back({"LengthMismatch", name});
    return;
  }
  for (double x : v) {
    if (!finite(x)) {
      errs.push_back({"InvariantViolation", std::string(name) + " not finite"});
      return;
    }
    if (x < 0.0) {
      errs.push_back({"InvariantViolation", std::string(name) + " >= 0"});
      return;
    }
  }
}

}  // namespace

ScenarioOrErrors validate_scenario(const MicrogridParams& params,
                                   const TimeGrid& grid,
                                   const PowerProfile& load,
                                   const PowerProfile& pv,
                                   const TariffSchedule& tariff,
                                   const SellWindowMask& mask) {
  std::vector<ValidationError> errs;

  if (grid.steps < 1) errs.push_back({"InvariantViolation", "steps >= 1"});
  if (!(grid.dt_hours > 0.0) || !finite(grid.dt_hours))
    errs.push_back({"InvariantViolation", "dt_hours > 0"});
  if (grid.start_hour < 0)
    errs.push_back({"InvariantViolation", "start_hour >= 0"});
  if (grid.steps >= 1 && grid.dt_hours > 0.0 &&
      grid.start_hour + grid.steps * grid.dt_hours > 24.0 + 1e-9)
    errs.push_back(
        {"InvariantViolation", "start_hour + steps*dt_hours <= 24"});

  check_series("load", load.values, grid.steps, errs);
  check_series("pv", pv.values, grid.steps, errs);
  check_series("buy_price", tariff.buy_price, grid.steps, errs);
  check_series("sell_price", tariff.sell_price, grid.steps, errs);

  if (static_cast<int>(mask.mask.size()) != grid.steps) {
    errs.push_back({"LengthMismatch", "mask"});
  } else {
    for (auto m : mask.mask)
      if (m != 0 && m != 1) {
        errs.push_back({"InvariantViolation", "mask entries binary"});
        break;
      }
  }
  if (!(mask.bonus_weight >= 0.0) || !finite(mask.bonus_weight))
    errs.push_back({"InvariantViolation", "bonus_weight >= 0"});

  const EssParams& e = params.ess;
  if (!(e.capacity_kwh > 0.0)) {
    errs.push_back({"InvariantViolation", "capacity_kwh > 0"});
  }
  if (!(e.eta_c > 0.0 && e.eta_c <= 1.0))
    errs.push_back({"InvariantViolation", "eta_c in (0,1]"});
  if (!(e.eta_d > 0.0 && e.eta_d <= 1.0))
    errs.push_back({"InvariantViolation", "eta_d in (0,1]"});
  if (!(0.0 <= e.soc_min && e.soc_min < e.soc_max && e.soc_max <= 1.0))
    errs.push_back({"InvariantViolation", "soc_min < soc_max"});
  if (!(e.soc_min <= e.soc_initial && e.soc_initial <= e.soc_max))
    errs.push_back({"InvariantViolation", "soc_min <= soc_initial <= soc_max"});
  if (!(e.soc_min <= e.soc_final_target && e.soc_final_target <= e.soc_max))
    errs.push_back(
        {"InvariantViolation", "soc_min <= soc_final_target <= soc_max"});
  if (!(e.p_charge_max_kw > 0.0) || !finite(e.p_charge_max_kw))
    errs.push_back({"InvariantViolation", "p_charge_max_kw > 0"});
  if (!(e.p_discharge_max_kw > 0.0) || !finite(e.p_discharge_max_kw))
    errs.push_back({"InvariantViolation", "p_discharge_max_kw > 0"});

  if (!(params.pv_capacity_kw >= 0.0))
    errs.push_back({"InvariantViolation", "pv_capacity_kw >= 0"});
  if (!(params.grid_limit_kw > 0.0) || !finite(params.grid_limit_kw))
    errs.push_back({"InvariantViolation", "grid_limit_kw > 0"});

  ScenarioOrErrors out;
  if (errs.empty()) {
    out.scenario.emplace(params, grid, load, pv, tariff, mask);
  } else {
    out.errors = std::move(errs);
  }
  return out;
}

}  // namespace dipps
