#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dipps {

enum class ProfileKind { Load, Pv };

// How discharge efficiency enters the SoC update.  "Paper" multiplies the
// discharged power by eta_d; "Physical" divides (battery loses more than it
// delivers).  With eta_c == eta_d the Paper convention makes a full
// store-then-release cycle lossless.
enum class EfficiencyConvention { Paper, Physical };

struct TimeGrid {
  int start_hour = 0;
  int steps = 24;
  double dt_hours = 1.0;
};

struct PowerProfile {
  std::vector<double> values;  // kW, one per grid step
  ProfileKind kind = ProfileKind::Load;
};

struct TariffSchedule {
  std::vector<double> buy_price;   // currency per kWh
  std::vector<double> sell_price;  // currency per kWh
};

struct EssParams {
  double capacity_kwh = 0.0;
  double eta_c = 0.95;
  double eta_d = 0.95;
  double soc_min = 0.2;
  double soc_max = 0.8;
  double soc_initial = 0.5;
  double soc_final_target = 0.5;
  double p_charge_max_kw = 0.0;
  double p_discharge_max_kw = 0.0;
  EfficiencyConvention efficiency_convention = EfficiencyConvention::Paper;

  // Charging power capped at 40% of capacity, discharging at 20%.
  static EssParams with_defaults(double capacity_kwh);
};

struct MicrogridParams {
  EssParams ess;
  double pv_capacity_kw = 0.0;  // scales the bundled PV shape
  double grid_limit_kw = 0.0;   // cap on each of P^G_B and P^S_G
};

struct SellWindowMask {
  std::vector<std::uint8_t> mask;  // one 0/1 entry per step
  double bonus_weight = 0.0;       // currency/kWh equivalent steering weight
};

// One committed scheduling step: the seven non-negative flows, the three
// mode binaries and the state of charge after the step.
struct DispatchStep {
  double p_g_l = 0.0;    // grid -> load
  double p_g_es = 0.0;   // grid -> storage
  double p_es_l = 0.0;   // storage -> load
  double p_es_g = 0.0;   // storage -> grid
  double p_pv_g = 0.0;   // pv -> grid
  double p_pv_es = 0.0;  // pv -> storage
  double p_pv_l = 0.0;   // pv -> load
  double b_v = 0.0;      // 1: pv charging mode, 0: grid charging mode
  double b_g = 0.0;      // 1: buying, 0: selling
  double b_c = 0.0;      // 1: charging, 0: discharging
  double soc_next = 0.0;
};

struct DispatchSchedule {
  std::vector<DispatchStep> steps;
  std::vector<double> soc_trajectory;  // length steps.size() + 1
};

struct ValidationError {
  std::string code;    // "LengthMismatch" or "InvariantViolation"
  std::string detail;  // offending series / field and bound
};

// A validated, immutable scenario.  Accessors wrap past the end of the day
// (periodic extension) so receding-horizon windows can look ahead.
class Scenario {
 public:
  Scenario(MicrogridParams params, TimeGrid grid, PowerProfile load,
           PowerProfile pv, TariffSchedule tariff, SellWindowMask mask)
      : params_(std::move(params)),
        grid_(grid),
        load_(std::move(load)),
        pv_(std::move(pv)),
        tariff_(std::move(tariff)),
        mask_(std::move(mask)) {}

  const MicrogridParams& params() const { return params_; }
  const TimeGrid& grid() const { return grid_; }
  const PowerProfile& load_profile() const { return load_; }
  const PowerProfile& pv_profile() const { return pv_; }
  const TariffSchedule& tariff() const { return tariff_; }
  const SellWindowMask& mask() const { return mask_; }

  int steps() const { return grid_.steps; }
  double dt() const { return grid_.dt_hours; }

  int wrap(int t) const {
    int n = grid_.steps;
    t %= n;
    return t < 0 ? t + n : t;
  }
  double load_at(int t) const { return load_.values[wrap(t)]; }
  double pv_at(int t) const { return pv_.values[wrap(t)]; }
  double buy_at(int t) const { return tariff_.buy_price[wrap(t)]; }
  double sell_at(int t) const { return tariff_.sell_price[wrap(t)]; }
  int mask_at(int t) const { return mask_.mask[wrap(t)]; }

  double load_peak() const;
  double pv_peak() const;

 private:
  MicrogridParams params_;
  TimeGrid grid_;
  PowerProfile load_;
  PowerProfile pv_;
  TariffSchedule tariff_;
  SellWindowMask mask_;
};

struct ScenarioOrErrors {
  std::optional<Scenario> scenario;
  std::vector<ValidationError> errors;
  bool ok() const { return scenario.has_value(); }
};

// Total validation: either a scenario handle or a non-empty error list.
// Nothing is clamped or repaired.
ScenarioOrErrors validate_scenario(const MicrogridParams& params,
                                   const TimeGrid& grid,
                                   const PowerProfile& load,
                                   const PowerProfile& pv,
                                   const TariffSchedule& tariff,
                                   const SellWindowMask& mask);

// Default grid exchange limit when a config does not provide one:
// twice the larger of the load and PV peaks.
double default_grid_limit(const PowerProfile& load, const PowerProfile& pv);

}  // namespace dipps
