#include "mgsched/demand_response.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "mgsched/error.hpp"

namespace mgsched {
namespace {

void require_horizon(const std::vector<double>& el, const std::vector<double>& prices) {
  if (el.empty() || el.size() != prices.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("EL profile has {} periods, prices have {}", el.size(), prices.size()));
  }
}

UserPlan make_plan(const std::vector<double>& el, const std::vector<double>& prices, double ratio,
                   std::vector<double> p_cn) {
  UserPlan plan;
  const std::size_t T = el.size();
  plan.p_un.resize(T);
  plan.p_move.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    plan.p_un[t] = (1.0 - ratio) * el[t];
    plan.p_move[t] = p_cn[t] - ratio * el[t];
  }
  plan.p_cn = std::move(p_cn);
  plan.price = prices;
  plan.f2 = user_cost(plan.served_profile(), prices);
  return plan;
}

}  // namespace

void DrConfig::validate() const {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorKind::invalid_argument, fmt::format("shiftable ratio {} outside (0, 1)", ratio));
  }
  if (p_cn_min.size() != p_cn_max.size()) {
    throw Error(ErrorKind::dimension_mismatch, "shiftable bound arrays differ in length");
  }
  for (std::size_t t = 0; t < p_cn_min.size(); ++t) {
    if (!(p_cn_min[t] >= 0.0 && p_cn_min[t] <= p_cn_max[t])) {
      throw Error(ErrorKind::invalid_argument,
                  fmt::format("shiftable bounds at period {} must satisfy 0 <= min <= max", t + 1));
    }
  }
}

ShiftBounds shift_bounds(const std::vector<double>& el, const DrConfig& cfg) {
  cfg.validate();
  ShiftBounds b;
  if (!cfg.p_cn_min.empty()) {
    if (cfg.p_cn_min.size() != el.size()) {
      throw Error(ErrorKind::dimension_mismatch, "shiftable bounds do not match the horizon");
    }
    b.lower = cfg.p_cn_min;
    b.upper = cfg.p_cn_max;
    return b;
  }
  b.lower.assign(el.size(), 0.0);
  b.upper.resize(el.size());
  for (std::size_t t = 0; t < el.size(); ++t) b.upper[t] = 2.0 * cfg.ratio * std::max(0.0, el[t]);
  return b;
}

std::vector<double> UserPlan::served_profile() const {
  std::vector<double> out(p_cn.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = p_un[t] + p_cn[t];
  return out;
}

LinearProgram build_user_lp(const std::vector<double>& el, const std::vector<double>& prices,
                            const DrConfig& cfg) {
  require_horizon(el, prices);
  const ShiftBounds bounds = shift_bounds(el, cfg);
  const int T = static_cast<int>(el.size());
  const double shiftable = cfg.ratio * std::accumulate(el.begin(), el.end(), 0.0);
  const double lo_sum = std::accumulate(bounds.lower.begin(), bounds.lower.end(), 0.0);
  const double hi_sum = std::accumulate(bounds.upper.begin(), bounds.upper.end(), 0.0);
  if (hi_sum < shiftable - 1e-9 || lo_sum > shiftable + 1e-9) {
    throw Error(ErrorKind::infeasible,
                fmt::format("shiftable energy {} kWh cannot fit bounds [{}, {}]", shiftable, lo_sum, hi_sum));
  }

  LinearProgram lp = LinearProgram::with_variables(T);
  for (int t = 0; t < T; ++t) {
    lp.c[t] = prices[static_cast<std::size_t>(t)];
    lp.lower[t] = bounds.lower[static_cast<std::size_t>(t)];
    lp.upper[t] = bounds.upper[static_cast<std::size_t>(t)];
  }
  lp.a_eq = Eigen::MatrixXd::Ones(1, T);
  lp.b_eq = Eigen::VectorXd::Constant(1, shiftable);
  return lp;
}

UserPlan solve_user(const std::vector<double>& el, const std::vector<double>& prices,
                    const DrConfig& cfg, const IpmConfig& ipm) {
  const LinearProgram lp = build_user_lp(el, prices, cfg);
  const IpmResult sol = solve_lp(lp, ipm);
  std::vector<double> p_cn(el.size());
  for (std::size_t t = 0; t < el.size(); ++t) {
    p_cn[t] = std::clamp(sol.x[static_cast<Eigen::Index>(t)], lp.lower[static_cast<Eigen::Index>(t)],
                         lp.upper[static_cast<Eigen::Index>(t)]);
  }
  return make_plan(el, prices, cfg.ratio, std::move(p_cn));
}

UserPlan baseline_plan(const std::vector<double>& el, const std::vector<double>& prices, double ratio) {
  require_horizon(el, prices);
  std::vector<double> p_cn(el.size());
  for (std::size_t t = 0; t < el.size(); ++t) p_cn[t] = ratio * el[t];
  return make_plan(el, prices, ratio, std::move(p_cn));
}

double user_cost(const std::vector<double>& profile, const std::vector<double>& prices, double dt) {
  if (profile.size() != prices.size()) {
    throw Error(ErrorKind::dimension_mismatch, "profile and prices differ in length");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < profile.size(); ++t) total += prices[t] * profile[t] * dt;
  return total;
}

}  // namespace mgsched
