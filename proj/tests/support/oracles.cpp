#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

namespace {

// Visits every k-subset of {0..n-1}.
void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == k) {
      visit(idx);
      return;
    }
    for (int i = start; i <= n - (k - pos); ++i) {
      idx[static_cast<std::size_t>(pos)] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
}

}  // namespace

double lp_vertex_min(const mgsched::LinearProgram& lp, double feas_tol) {
  const int n = lp.variables();
  const int m_eq = static_cast<int>(lp.b_eq.size());
  const int m_ub = static_cast<int>(lp.b_ub.size());
  double best = std::numeric_limits<double>::infinity();

  for (int mask = 0; mask < (1 << m_ub); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < m_ub; ++i) {
      if (mask & (1 << i)) active.push_back(i);
    }
    const int k = m_eq + static_cast<int>(active.size());
    if (k > n) continue;
    for_each_subset(n, k, [&](const std::vector<int>& basic) {
      std::vector<int> nonbasic;
      for (int j = 0, b = 0; j < n; ++j) {
        if (b < k && basic[static_cast<std::size_t>(b)] == j) {
          ++b;
        } else {
          nonbasic.push_back(j);
        }
      }
      const int nb = static_cast<int>(nonbasic.size());
      for (long bits = 0; bits < (1L << nb); ++bits) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < nb; ++i) {
          const int j = nonbasic[static_cast<std::size_t>(i)];
          x(j) = (bits >> i) & 1 ? lp.upper(j) : lp.lower(j);
        }
        if (k > 0) {
          Eigen::MatrixXd a(k, k);
          Eigen::VectorXd rhs(k);
          for (int r = 0; r < k; ++r) {
            const bool eq = r < m_eq;
            const auto row = eq ? lp.a_eq.row(r) : lp.a_ub.row(active[static_cast<std::size_t>(r - m_eq)]);
            rhs(r) = eq ? lp.b_eq(r) : lp.b_ub(active[static_cast<std::size_t>(r - m_eq)]);
            for (int c = 0; c < k; ++c) a(r, c) = row(basic[static_cast<std::size_t>(c)]);
            for (int j : nonbasic) rhs(r) -= row(j) * x(j);
          }
          Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
          if (!lu.isInvertible()) continue;
          const Eigen::VectorXd xb = lu.solve(rhs);
          for (int c = 0; c < k; ++c) x(basic[static_cast<std::size_t>(c)]) = xb(c);
        }
        bool ok = true;
        for (int j = 0; j < n && ok; ++j) ok = x(j) >= lp.lower(j) - feas_tol && x(j) <= lp.upper(j) + feas_tol;
        if (ok && m_eq > 0) ok = ((lp.a_eq * x - lp.b_eq).cwiseAbs().maxCoeff() <= feas_tol);
        if (ok && m_ub > 0) ok = ((lp.a_ub * x - lp.b_ub).maxCoeff() <= feas_tol);
        if (ok) best = std::min(best, lp.c.dot(x));
      }
    });
  }
  return best;
}

mgsched::LinearProgram random_feasible_lp(std::mt19937_64& rng, int n, int ineq_rows, int eq_rows) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> width(0.5, 4.0);
  mgsched::LinearProgram lp = mgsched::LinearProgram::with_variables(n);
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) {
    lp.c(j) = u(rng);
    lp.lower(j) = 2.0 * u(rng);
    lp.upper(j) = lp.lower(j) + width(rng);
    x0(j) = lp.lower(j) + (0.5 + 0.5 * u(rng)) * (lp.upper(j) - lp.lower(j));
  }
  lp.a_ub = Eigen::MatrixXd(ineq_rows, n);
  lp.b_ub = Eigen::VectorXd(ineq_rows);
  for (int r = 0; r < ineq_rows; ++r) {
    for (int j = 0; j < n; ++j) lp.a_ub(r, j) = u(rng);
    lp.b_ub(r) = lp.a_ub.row(r).dot(x0) + 0.5 * (1.0 + u(rng));
  }
  lp.a_eq = Eigen::MatrixXd(eq_rows, n);
  lp.b_eq = Eigen::VectorXd(eq_rows);
  for (int r = 0; r < eq_rows; ++r) {
    for (int j = 0; j < n; ++j) lp.a_eq(r, j) = u(rng);
    lp.b_eq(r) = lp.a_eq.row(r).dot(x0);
  }
  return lp;
}

double enumerated_confidence(const mgsched::ProbSeq& el, double expected_el, double reserve) {
  double covered = 0.0;
  for (std::size_t u = 0; u < el.size(); ++u) {
    if (reserve >= static_cast<double>(u) * el.step() - expected_el) covered += el[u];
  }
  return covered;
}

double scanned_min_reserve(const mgsched::ProbSeq& el, double expected_el, double gamma) {
  // Coverage only changes at u*q - E, so scanning those candidates is exhaustive.
  std::vector<double> candidates{0.0};
  for (std::size_t u = 0; u < el.size(); ++u) {
    candidates.push_back(std::max(0.0, static_cast<double>(u) * el.step() - expected_el));
  }
  std::sort(candidates.begin(), candidates.end());
  for (double r : candidates) {
    if (enumerated_confidence(el, expected_el, r) >= gamma) return r;
  }
  return candidates.back();
}

mgsched::ProbSeq random_seq(std::mt19937_64& rng, std::size_t length, double step) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(length);
  double sum = 0.0;
  for (auto& v : p) {
    v = u(rng) < 0.2 ? 0.0 : u(rng);
    sum += v;
  }
  if (sum == 0.0) {
    p[0] = 1.0;
    sum = 1.0;
  }
  for (auto& v : p) v /= sum;
  return mgsched::ProbSeq(std::move(p), step);
}

double grid_search_one_period(const mgsched::DispatchContext& ctx, double grid_kw) {
  using mgsched::Schedule;
  const mgsched::MtUnit& unit = ctx.units.at(0);
  const double demand = ctx.demand.at(0);
  const double res_cap = mgsched::ess_reserve_limit(ctx.ess.soc_init, 0.0, ctx.ess, ctx.dt);
  double best = std::numeric_limits<double>::infinity();
  Schedule s(1, 1);
  s.soc = {ctx.ess.soc_init, ctx.ess.soc_init};
  auto steps = [&](double hi) { return static_cast<int>(std::floor(hi / grid_kw + 1e-9)); };
  for (int on = 0; on <= 1; ++on) {
    s.on[0] = static_cast<std::uint8_t>(on);
    s.start[0] = static_cast<std::uint8_t>(on);
    for (int ip = 0; ip <= (on ? steps(unit.p_max) : 0); ++ip) {
      const double p = ip * grid_kw;
      if (on && p < unit.p_min - 1e-9) continue;
      // Power balance pins the shed amount; only deficits can be shed.
      const double shed = demand - p;
      if (shed < -1e-9 || shed > demand + 1e-9) continue;
      for (int ir = 0; ir <= (on ? steps(unit.p_max - p) : 0); ++ir) {
        for (int ie = 0; ie <= steps(res_cap); ++ie) {
          s.p_mt[0] = p;
          s.r_mt[0] = ir * grid_kw;
          s.p_res[0] = ie * grid_kw;
          s.p_ls[0] = std::max(0.0, shed);
          if (!mgsched::check_feasible(s, ctx).empty()) continue;
          best = std::min(best, mgsched::evaluate_cost(s, ctx).total());
        }
      }
    }
  }
  return best;
}

}  // namespace oracle
