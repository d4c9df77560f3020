#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mgsched/demand_response.hpp"
#include "mgsched/ipm_solver.hpp"
#include "mgsched/jaya_solver.hpp"
#include "mgsched/microgrid_model.hpp"
#include "mgsched/stochastic_models.hpp"

namespace mgsched {

struct PricingConfig {
  std::vector<double> tou;  // $/kWh per period
  double ref_price = 0.6;   // $/kWh
  double ref_el = 51.5;     // kW
  int max_iters = 20;
  /// Early exit once successive real-time prices move less than this ($/kWh).
  /// Zero disables the early exit.
  double stability_tol = 1e-4;
};

struct ScenarioConfig {
  std::string name;
  int periods = 24;
  double dt = 1.0;             // h
  double step = 2.5;           // kW, discretisation step q
  double gamma = 0.95;
  double shed_penalty = 10.0;  // $/kWh
  std::vector<PvModel> pv;     // per period
  std::vector<WtModel> wt;     // per period
  std::vector<LoadModel> load; // per period
  std::vector<MtUnit> units;
  EssConfig ess;
  DrConfig dr;
  PricingConfig pricing;
  JayaParams jaya;
  IpmConfig ipm;

  /// Throws Error(validation) naming the offending field.
  void validate() const;
};

/// Parses a scenario document. `source` names the input in error messages.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<scenario>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace mgsched
