#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mgsched {

struct MtUnit {
  std::string name;
  double fixed_cost = 0.0;    // $ per on-hour
  double startup_cost = 0.0;  // $ per start
  double fuel_slope = 0.0;    // $/kWh
  double reserve_cost = 0.0;  // $/kWh
  double p_min = 0.0;         // kW
  double p_max = 0.0;         // kW

  void validate() const;
};

struct EssConfig {
  double p_ch_max = 40.0;
  double p_dc_max = 40.0;
  double eta_ch = 0.95;
  double eta_dc = 0.95;
  double soc_min = 32.0;   // kWh
  double soc_max = 160.0;  // kWh
  double soc_init = 32.0;  // kWh, also the required end-of-cycle value
  double charge_price = 0.3;     // $/kWh paid to the MG when charging
  double discharge_price = 0.5;  // $/kWh paid by the MG when discharging
  double reserve_price = 0.02;   // $/kWh of offered reserve
  // Parsed for completeness; no network or reactive data exists to enforce them.
  double q_ch_max = 0.0;
  double q_dc_max = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;

  void validate() const;
};

/// One upper-level decision over T periods and M units. Unit-indexed arrays
/// are period-major: index t * units + n. `soc` has T + 1 entries, soc[t]
/// being the stored energy at the start of period t.
struct Schedule {
  int periods = 0;
  int units = 0;
  std::vector<std::uint8_t> on;
  std::vector<std::uint8_t> start;
  std::vector<double> p_mt;
  std::vector<double> r_mt;
  std::vector<double> p_ch;
  std::vector<double> p_dc;
  std::vector<double> p_res;
  std::vector<double> p_ls;
  std::vector<double> soc;

  Schedule() = default;
  Schedule(int periods, int units);

  std::size_t at(int t, int n) const { return static_cast<std::size_t>(t * units + n); }
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct PriceTrack {
  std::vector<double> tou;  // $/kWh per period
  std::vector<double> rt;   // $/kWh per period
  double ref_price = 0.6;
  double ref_el = 51.5;
};

/// Everything the upper level needs for one solve.
struct DispatchContext {
  std::vector<MtUnit> units;
  EssConfig ess;
  std::vector<double> demand;       // kW the MG must serve per period
  std::vector<double> price;        // $/kWh per period
  std::vector<double> reserve_req;  // kW, certified chance-constraint quantiles
  double shed_penalty = 10.0;       // $/kWh
  double dt = 1.0;                  // h

  int periods() const { return static_cast<int>(demand.size()); }
  int unit_count() const { return static_cast<int>(units.size()); }
  void validate() const;
};

struct CostBreakdown {
  double revenue = 0.0;  // what the users pay the MG
  double ess = 0.0;
  double mt = 0.0;
  double ess_reserve = 0.0;
  double shedding = 0.0;

  /// F1, the MG net cost.
  double total() const { return -revenue + ess + mt + ess_reserve + shedding; }
};

CostBreakdown evaluate_cost(const Schedule& s, const DispatchContext& ctx);

double soc_step(double soc, double p_ch, double p_dc, const EssConfig& ess, double dt = 1.0);
double ess_reserve_limit(double soc, double p_dc, const EssConfig& ess, double dt = 1.0);

enum class Constraint {
  power_balance,
  mt_output_limits,
  soc_dynamics,
  soc_bounds,
  ess_power_limits,
  soc_closure,
  mt_reserve_headroom,
  ess_reserve_limit,
  reserve_chance,
  charge_discharge_exclusive,
  startup_logic,
  nonnegativity,
};

std::string_view to_string(Constraint c);

struct Violation {
  int period;  // 0-based; -1 for whole-horizon constraints
  Constraint constraint;
  double magnitude;
};

/// Lists every violated constraint; empty means feasible.
std::vector<Violation> check_feasible(const Schedule& s, const DispatchContext& ctx,
                                      double tol = 1e-6);

struct RepairOutcome {
  bool repaired = true;  // false: the candidate could not be made feasible
};

/// Deterministic projection of a raw candidate onto the feasible set, in place.
RepairOutcome repair(Schedule& s, const DispatchContext& ctx);

/// Recomputes start flags from the commitment with all units off before t = 0.
void derive_startups(Schedule& s);

}  // namespace mgsched
