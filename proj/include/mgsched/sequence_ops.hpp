#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mgsched/error.hpp"

namespace mgsched {

/// A discrete probability distribution over the power levels 0, q, 2q, ..., Nq.
class ProbSeq {
 public:
  /// Validates non-negativity, unit mass (1e-9) and a positive step.
  ProbSeq(std::vector<double> probs, double step);

  static ProbSeq point_mass(double step) { return ProbSeq({1.0}, step); }

  const std::vector<double>& probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  double step() const { return step_; }
  std::size_t size() const { return probs_.size(); }
  /// N, the largest index.
  std::size_t max_index() const { return probs_.size() - 1; }
  double power_at(std::size_t i) const { return static_cast<double>(i) * step_; }

  double expectation() const;

 private:
  std::vector<double> probs_;
  double step_;
};

template <typename Model>
concept ContinuousModel = requires(const Model& m, double x) {
  { m.support_max() } -> std::convertible_to<double>;
  { m.interval_mass(x, x) } -> std::convertible_to<double>;
};

/// Bin i covers [iq - q/2, iq + q/2] clipped to [0, p_max]; bin 0 starts at 0
/// and the last bin (N = ceil(p_max / q)) ends at p_max. Atoms at the support
/// ends fall into the first/last non-empty bins. The result is renormalised.
template <ContinuousModel Model>
ProbSeq discretize(const Model& model, double q);

double expectation(const ProbSeq& s);
ProbSeq add_convolve(const ProbSeq& a, const ProbSeq& b);
/// Difference d - c with every non-positive outcome collapsed onto index 0.
/// The result has the minuend's length.
ProbSeq sub_convolve(const ProbSeq& d, const ProbSeq& c);

struct ElSequence {
  ProbSeq seq;
  /// E(load) - E(pv) - E(wt); the value used in the balance and reserve rules.
  double expected_el;
  /// Expectation of the zero-truncated sequence itself (diagnostic).
  double truncated_expectation;
};

ElSequence el_sequence(const ProbSeq& load, const ProbSeq& pv, const ProbSeq& wt);

/// CSV dump: index,power_kw,probability.
void write_sequence_csv(std::ostream& out, const ProbSeq& s);

// Implementation of the template.

namespace detail {
std::size_t sequence_length_index(double p_max, double q);
ProbSeq normalise_bins(std::vector<double> masses, double q);
}  // namespace detail

template <ContinuousModel Model>
ProbSeq discretize(const Model& model, double q) {
  if (!(q > 0.0)) throw Error(ErrorKind::invalid_argument, "discretization step q must be > 0");
  const double p_max = model.support_max();
  if (!(p_max >= 0.0)) throw Error(ErrorKind::invalid_argument, "support maximum must be >= 0");
  const std::size_t n = detail::sequence_length_index(p_max, q);
  if (n == 0) return ProbSeq::point_mass(q);

  std::vector<double> masses(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    const double centre = static_cast<double>(i) * q;
    const double lo = i == 0 ? 0.0 : std::min(centre - 0.5 * q, p_max);
    const double hi = i == n ? p_max : std::min(centre + 0.5 * q, p_max);
    masses[i] = hi > lo ? model.interval_mass(lo, hi) : 0.0;
  }
  return detail::normalise_bins(std::move(masses), q);
}

}  // namespace mgsched
