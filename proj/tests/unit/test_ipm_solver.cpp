#include <cmath>
#include <random>

#include "doctest.h"
#include "mgsched/error.hpp"
#include "mgsched/ipm_solver.hpp"
#include "oracles.hpp"

using namespace mgsched;
using doctest::Approx;

TEST_CASE("single variable box") {
  LinearProgram lp = LinearProgram::with_variables(1);
  lp.c << 1.0;
  lp.lower << 1.0;
  lp.upper << 2.0;
  const IpmResult r = solve_lp(lp);
  CHECK(r.x(0) == Approx(1.0).epsilon(1e-5));
  CHECK(r.objective == Approx(1.0).epsilon(1e-5));
}

TEST_CASE("simplex facet") {
  LinearProgram lp = LinearProgram::with_variables(2);
  lp.c << -1.0, -1.0;
  lp.a_ub = Eigen::MatrixXd(1, 2);
  lp.a_ub << 1.0, 1.0;
  lp.b_ub = Eigen::VectorXd::Constant(1, 1.0);
  const IpmResult r = solve_lp(lp);
  CHECK(r.objective == Approx(-1.0).epsilon(1e-5));
  CHECK(r.x.sum() == Approx(1.0).epsilon(1e-5));
  CHECK(r.x.minCoeff() >= -1e-8);
}

TEST_CASE("random LPs match vertex enumeration") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 40; ++i) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const LinearProgram lp = oracle::random_feasible_lp(rng, n, 1 + static_cast<int>(rng() % 3),
                                                        static_cast<int>(rng() % 2));
    const double ref = oracle::lp_vertex_min(lp);
    const IpmResult r = solve_lp(lp);
    CHECK(r.objective == Approx(ref).epsilon(1e-5).scale(1.0));
    CHECK(r.gap < 1e-5);
    CHECK(r.primal_residual < 1e-8);
    CHECK(r.dual_residual < 1e-8);
    for (double s : r.min_slack_trace) CHECK(s > 0.0);
  }
}

TEST_CASE("duality gap decreases across iterations") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 20; ++i) {
    const LinearProgram lp = oracle::random_feasible_lp(rng, 6, 2, 1);
    const IpmResult r = solve_lp(lp);
    for (std::size_t k = 1; k < r.gap_trace.size(); ++k) {
      if (r.gap_trace[k - 1] >= 10 * 1e-5) {
        CHECK(r.gap_trace[k] < r.gap_trace[k - 1]);
      } else {
        CHECK(r.gap_trace[k] <= r.gap_trace[k - 1] + 1e-12);
      }
    }
  }
}

TEST_CASE("infeasible and unbounded problems are detected") {
  LinearProgram inf = LinearProgram::with_variables(2);
  inf.c << 1.0, 1.0;
  inf.a_eq = Eigen::MatrixXd(1, 2);
  inf.a_eq << 1.0, 1.0;
  inf.b_eq = Eigen::VectorXd::Constant(1, 5.0);
  inf.upper << 1.0, 1.0;
  try {
    solve_lp(inf);
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::infeasible);
  }

  LinearProgram unb = LinearProgram::with_variables(2);
  unb.c << -1.0, 0.0;
  unb.a_ub = Eigen::MatrixXd(1, 2);
  unb.a_ub << -1.0, 1.0;
  unb.b_ub = Eigen::VectorXd::Constant(1, 1.0);
  try {
    solve_lp(unb);
    FAIL("expected unbounded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unbounded);
  }
}

TEST_CASE("iteration limit") {
  std::mt19937_64 rng(3);
  const LinearProgram lp = oracle::random_feasible_lp(rng, 8, 3, 1);
  IpmConfig cfg;
  cfg.max_iters = 2;
  try {
    solve_lp(lp, cfg);
    FAIL("expected iteration limit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::iteration_limit);
  }
}

TEST_CASE("config and dimension validation") {
  IpmConfig cfg;
  cfg.gap_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  LinearProgram lp = LinearProgram::with_variables(2);
  lp.a_ub = Eigen::MatrixXd(1, 3);
  lp.b_ub = Eigen::VectorXd(1);
  CHECK_THROWS_AS(solve_lp(lp), Error);
}
