#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mgsched {

/// minimize c'x  s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  lower <= x <= upper.
/// Bounds may be +-infinity. Empty constraint blocks are allowed.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// An LP with n variables, no rows and bounds [0, +inf).
  static LinearProgram with_variables(int n);

  int variables() const { return static_cast<int>(c.size()); }
  void validate() const;
};

struct IpmConfig {
  double gap_tolerance = 1e-5;
  int max_iters = 200;
  double initial_point_margin = 1.0;
  /// Absolute residual target for the standard-form constraints.
  double feasibility_tolerance = 1e-9;

  void validate() const;
};

struct IpmResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Complementarity x's of the standard form at termination.
  double gap = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// Complementarity per iteration, starting with the initial point.
  std::vector<double> gap_trace;
  /// Smallest primal slack seen at each iteration (all > 0 while iterating).
  std::vector<double> min_slack_trace;
};

/// Mehrotra predictor-corrector on the standard form min c'z, Az = b, z >= 0.
/// Throws Error(infeasible | unbounded | iteration_limit).
IpmResult solve_lp(const LinearProgram& lp, const IpmConfig& cfg = {});

}  // namespace mgsched
