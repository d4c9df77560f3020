#include "mgsched/ipm_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mgsched/error.hpp"

namespace mgsched {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStepDamping = 0.995;
constexpr double kDivergence = 1e12;
constexpr std::size_t kStallWindow = 5;

// x = offset + sum over terms of sign * z[col]
struct VariableMap {
  double offset = 0.0;
  int col = -1;
  double sign = 1.0;
  int neg_col = -1;  // second column of a split free variable
};

struct StandardForm {
  MatrixXd a;
  VectorXd b;
  VectorXd c;
  double c_offset = 0.0;
  std::vector<VariableMap> map;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  const int n = lp.variables();
  StandardForm sf;
  sf.map.resize(static_cast<std::size_t>(n));

  int cols = 0;
  int bound_rows = 0;
  for (int j = 0; j < n; ++j) {
    VariableMap& m = sf.map[j];
    const bool lo = std::isfinite(lp.lower[j]);
    const bool hi = std::isfinite(lp.upper[j]);
    if (lo) {
      m.offset = lp.lower[j];
      m.col = cols++;
      if (hi) ++bound_rows;
    } else if (hi) {
      m.offset = lp.upper[j];
      m.col = cols++;
      m.sign = -1.0;
    } else {
      m.col = cols++;
      m.neg_col = cols++;
    }
  }
  const int eq_rows = static_cast<int>(lp.a_eq.rows());
  const int ub_rows = static_cast<int>(lp.a_ub.rows());
  const int slack_cols = ub_rows + bound_rows;
  const int total_cols = cols + slack_cols;
  const int total_rows = eq_rows + ub_rows + bound_rows;

  // P maps z (first `cols` entries) to x - offset.
  MatrixXd p = MatrixXd::Zero(n, cols);
  VectorXd offset(n);
  for (int j = 0; j < n; ++j) {
    const VariableMap& m = sf.map[j];
    offset[j] = m.offset;
    p(j, m.col) = m.sign;
    if (m.neg_col >= 0) p(j, m.neg_col) = -1.0;
  }

  sf.a = MatrixXd::Zero(total_rows, total_cols);
  sf.b = VectorXd::Zero(total_rows);
  sf.c = VectorXd::Zero(total_cols);
  sf.c.head(cols) = p.transpose() * lp.c;
  sf.c_offset = lp.c.dot(offset);

  int row = 0;
  if (eq_rows > 0) {
    sf.a.block(0, 0, eq_rows, cols) = lp.a_eq * p;
    sf.b.segment(0, eq_rows) = lp.b_eq - lp.a_eq * offset;
    row += eq_rows;
  }
  int slack = cols;
  if (ub_rows > 0) {
    sf.a.block(row, 0, ub_rows, cols) = lp.a_ub * p;
    sf.b.segment(row, ub_rows) = lp.b_ub - lp.a_ub * offset;
    for (int i = 0; i < ub_rows; ++i) sf.a(row + i, slack++) = 1.0;
    row += ub_rows;
  }
  for (int j = 0; j < n; ++j) {
    if (!(std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j]))) continue;
    sf.a(row, sf.map[j].col) = 1.0;
    sf.a(row, slack++) = 1.0;
    sf.b[row] = lp.upper[j] - lp.lower[j];
    ++row;
  }
  return sf;
}

VectorXd recover_x(const StandardForm& sf, const VectorXd& z) {
  VectorXd x(static_cast<Eigen::Index>(sf.map.size()));
  for (std::size_t j = 0; j < sf.map.size(); ++j) {
    const VariableMap& m = sf.map[j];
    double v = m.offset + m.sign * z[m.col];
    if (m.neg_col >= 0) v -= z[m.neg_col];
    x[static_cast<Eigen::Index>(j)] = v;
  }
  return x;
}

double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = 1.0 / kStepDamping;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

class NormalEquations {
 public:
  NormalEquations(const MatrixXd& a, const VectorXd& d) : m_(a * d.asDiagonal() * a.transpose()) {
    // A tiny diagonal shift keeps the factorisation alive near degenerate vertices;
    // iterative refinement against the unshifted matrix removes its bias.
    MatrixXd shifted = m_;
    const double shift = 1e-14 * std::max(1.0, m_.diagonal().cwiseAbs().maxCoeff());
    shifted.diagonal().array() += shift;
    llt_.compute(shifted);
    ok_ = llt_.info() == Eigen::Success;
    if (!ok_) lu_.compute(shifted);
  }
  VectorXd solve(const VectorXd& rhs) const {
    VectorXd y = raw_solve(rhs);
    for (int k = 0; k < 3; ++k) y += raw_solve(rhs - m_ * y);
    return y;
  }

 private:
  VectorXd raw_solve(const VectorXd& rhs) const { return ok_ ? VectorXd(llt_.solve(rhs)) : VectorXd(lu_.solve(rhs)); }

  MatrixXd m_;
  Eigen::LLT<MatrixXd> llt_;
  Eigen::PartialPivLU<MatrixXd> lu_;
  bool ok_ = false;
};

}  // namespace

LinearProgram LinearProgram::with_variables(int n) {
  LinearProgram lp;
  lp.c = VectorXd::Zero(n);
  lp.a_eq = MatrixXd(0, n);
  lp.b_eq = VectorXd(0);
  lp.a_ub = MatrixXd(0, n);
  lp.b_ub = VectorXd(0);
  lp.lower = VectorXd::Zero(n);
  lp.upper = VectorXd::Constant(n, kInf);
  return lp;
}

void LinearProgram::validate() const {
  const auto n = c.size();
  const bool ok = a_eq.cols() == n && a_eq.rows() == b_eq.size() && a_ub.cols() == n &&
                  a_ub.rows() == b_ub.size() && lower.size() == n && upper.size() == n;
  if (!ok) throw Error(ErrorKind::dimension_mismatch, "linear program dimensions are inconsistent");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lower[j] > upper[j]) {
      throw Error(ErrorKind::infeasible, fmt::format("variable {} has lower > upper", j));
    }
  }
}

void IpmConfig::validate() const {
  if (!(gap_tolerance > 0.0)) throw Error(ErrorKind::invalid_argument, "gap tolerance must be > 0");
  if (max_iters < 1) throw Error(ErrorKind::invalid_argument, "ipm max_iters must be >= 1");
  if (!(initial_point_margin > 0.0)) throw Error(ErrorKind::invalid_argument, "initial point margin must be > 0");
}

IpmResult solve_lp(const LinearProgram& lp, const IpmConfig& cfg) {
  lp.validate();
  cfg.validate();
  const StandardForm sf = to_standard_form(lp);
  const MatrixXd& a = sf.a;
  const VectorXd& b = sf.b;
  const VectorXd& c = sf.c;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  IpmResult result;

  if (m == 0) {
    // Only sign constraints: the optimum sits at z = 0 unless some cost is negative.
    if ((c.array() < 0.0).any()) throw Error(ErrorKind::unbounded, "objective is unbounded below");
    const VectorXd z = VectorXd::Zero(n);
    result.x = recover_x(sf, z);
    result.objective = lp.c.dot(result.x);
    return result;
  }

  // Mehrotra's starting point, shifted into the positive orthant.
  VectorXd x, y, s;
  {
    const NormalEquations ne(a, VectorXd::Ones(n));
    x = a.transpose() * ne.solve(b);
    y = ne.solve(a * c);
    s = c - a.transpose() * y;
    x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
    s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
    const double xs = x.dot(s);
    if (xs > 0.0) {
      const double dx = 0.5 * xs / s.sum();
      const double ds = 0.5 * xs / x.sum();
      x.array() += dx;
      s.array() += ds;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(x[i] > 0.0)) x[i] = cfg.initial_point_margin;
      if (!(s[i] > 0.0)) s[i] = cfg.initial_point_margin;
    }
  }

  const double feas_tol = cfg.feasibility_tolerance;
  VectorXd rp, rd;
  std::vector<double> rp_hist, rd_hist;
  for (int iter = 0;; ++iter) {
    rp = b - a * x;
    rd = c - a.transpose() * y - s;
    const double comp = x.dot(s);
    result.gap_trace.push_back(comp);
    result.min_slack_trace.push_back(x.minCoeff());
    const double rp_norm = rp.lpNorm<Eigen::Infinity>();
    const double rd_norm = rd.lpNorm<Eigen::Infinity>();
    result.iterations = iter;
    result.primal_residual = rp_norm;
    result.dual_residual = rd_norm;
    result.gap = comp;

    if (comp < cfg.gap_tolerance && rp_norm <= feas_tol && rd_norm <= feas_tol) break;

    if (!std::isfinite(comp) || !std::isfinite(rp_norm) || !std::isfinite(rd_norm)) {
      throw Error(ErrorKind::iteration_limit, fmt::format("numerical breakdown after {} iterations", iter));
    }
    if (x.lpNorm<Eigen::Infinity>() > kDivergence || y.lpNorm<Eigen::Infinity>() > kDivergence) {
      // A diverging primal iterate with a falling objective is a primal ray;
      // a diverging dual iterate certifies primal infeasibility.
      if (x.lpNorm<Eigen::Infinity>() > kDivergence && c.dot(x) < 0.0) {
        throw Error(ErrorKind::unbounded, "objective is unbounded below");
      }
      throw Error(ErrorKind::infeasible, "linear program is infeasible");
    }
    // Complementarity has collapsed but one residual refuses to shrink: the
    // iterate is pinned against the boundary of an empty region.
    rp_hist.push_back(rp_norm);
    rd_hist.push_back(rd_norm);
    if (comp < cfg.gap_tolerance && static_cast<std::size_t>(iter) >= kStallWindow) {
      const auto stalled = [&](const std::vector<double>& h, double scale) {
        const double now = h.back();
        const double before = h[h.size() - 1 - kStallWindow];
        return now > 1e3 * feas_tol * (1.0 + scale) && now > 0.5 * before;
      };
      if (stalled(rp_hist, b.lpNorm<Eigen::Infinity>()) && rd_norm <= feas_tol * (1.0 + c.lpNorm<Eigen::Infinity>())) {
        throw Error(ErrorKind::infeasible, "linear program is infeasible (primal residual stalled)");
      }
      if (stalled(rd_hist, c.lpNorm<Eigen::Infinity>()) && rp_norm <= feas_tol * (1.0 + b.lpNorm<Eigen::Infinity>())) {
        throw Error(ErrorKind::unbounded, "linear program is unbounded (dual residual stalled)");
      }
    }
    if (iter >= cfg.max_iters) {
      throw Error(ErrorKind::iteration_limit,
                  fmt::format("no convergence after {} iterations (gap {})", iter, comp));
    }

    const double mu = comp / static_cast<double>(n);
    const VectorXd d = x.cwiseQuotient(s);
    const NormalEquations ne(a, d);

    auto direction = [&](const VectorXd& rc, VectorXd& dx, VectorXd& dy, VectorXd& ds) {
      const VectorXd rhs = rp + a * (d.cwiseProduct(rd) - rc.cwiseQuotient(s));
      dy = ne.solve(rhs);
      ds = rd - a.transpose() * dy;
      dx = (rc - x.cwiseProduct(ds)).cwiseQuotient(s);
    };

    // Predictor.
    VectorXd dx_aff, dy_aff, ds_aff;
    const VectorXd rc_aff = -x.cwiseProduct(s);
    direction(rc_aff, dx_aff, dy_aff, ds_aff);
    const double ap_aff = std::min(1.0, max_step(x, dx_aff));
    const double ad_aff = std::min(1.0, max_step(s, ds_aff));
    const double mu_aff = (x + ap_aff * dx_aff).dot(s + ad_aff * ds_aff) / static_cast<double>(n);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    // Corrector with centring.
    VectorXd dx, dy, ds;
    const VectorXd rc = rc_aff - dx_aff.cwiseProduct(ds_aff) + VectorXd::Constant(n, sigma * mu);
    direction(rc, dx, dy, ds);
    const double ap = std::min(1.0, kStepDamping * max_step(x, dx));
    const double ad = std::min(1.0, kStepDamping * max_step(s, ds));
    x += ap * dx;
    y += ad * dy;
    s += ad * ds;
  }

  result.x = recover_x(sf, x);
  result.objective = lp.c.dot(result.x);
  return result;
}

}  // namespace mgsched
