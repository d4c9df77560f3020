#pragma once

#include <vector>

#include "mgsched/ipm_solver.hpp"

namespace mgsched {

/// Shiftable-load settings. Empty bound arrays mean the defaults
/// [0, 2 * ratio * E(P_EL,t)].
struct DrConfig {
  double ratio = 0.2;
  std::vector<double> p_cn_min;
  std::vector<double> p_cn_max;

  void validate() const;
};

/// Bounds actually used for a given expected-EL profile.
struct ShiftBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

ShiftBounds shift_bounds(const std::vector<double>& el_expected, const DrConfig& cfg);

struct UserPlan {
  std::vector<double> p_cn;
  std::vector<double> p_un;
  std::vector<double> p_move;  // p_cn - ratio * E(P_EL,t)
  std::vector<double> price;
  double f2 = 0.0;             // $

  /// E(P_EL,t) + p_move, the load profile the MG has to serve.
  std::vector<double> served_profile() const;
};

/// Variables are p_cn,t; the objective omits the constant non-shiftable cost.
LinearProgram build_user_lp(const std::vector<double>& el_expected,
                            const std::vector<double>& prices, const DrConfig& cfg);

UserPlan solve_user(const std::vector<double>& el_expected, const std::vector<double>& prices,
                    const DrConfig& cfg, const IpmConfig& ipm = {});

/// The plan with no shifting: p_cn,t = ratio * E(P_EL,t).
UserPlan baseline_plan(const std::vector<double>& el_expected, const std::vector<double>& prices,
                       double ratio);

/// Sum over t of price_t * (p_un,t + p_cn,t) * dt.
double user_cost(const std::vector<double>& profile, const std::vector<double>& prices,
                 double dt = 1.0);

}  // namespace mgsched
