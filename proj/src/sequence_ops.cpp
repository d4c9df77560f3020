#include "mgsched/sequence_ops.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace mgsched {
namespace {

void require_same_step(const ProbSeq& a, const ProbSeq& b) {
  if (std::abs(a.step() - b.step()) > 1e-12 * std::max(a.step(), b.step())) {
    throw Error(ErrorKind::step_mismatch,
                fmt::format("sequence steps differ: {} vs {}", a.step(), b.step()));
  }
}

}  // namespace

ProbSeq::ProbSeq(std::vector<double> probs, double step)
    : probs_(std::move(probs)), step_(step) {
  if (!(step_ > 0.0)) throw Error(ErrorKind::invalid_argument, "sequence step must be > 0");
  if (probs_.empty()) throw Error(ErrorKind::invalid_argument, "sequence must be non-empty");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) {
      throw Error(ErrorKind::invalid_argument, fmt::format("negative probability {}", p));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::invalid_argument,
                fmt::format("sequence mass {} differs from 1", total));
  }
}

double ProbSeq::expectation() const {
  double e = 0.0;
  for (std::size_t i = 1; i < probs_.size(); ++i) e += static_cast<double>(i) * probs_[i];
  return e * step_;
}

double expectation(const ProbSeq& s) { return s.expectation(); }

ProbSeq add_convolve(const ProbSeq& a, const ProbSeq& b) {
  require_same_step(a, b);
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += ai * b[j];
  }
  return ProbSeq(std::move(c), a.step());
}

ProbSeq sub_convolve(const ProbSeq& d, const ProbSeq& c) {
  require_same_step(d, c);
  std::vector<double> e(d.size(), 0.0);
  for (std::size_t id = 0; id < d.size(); ++id) {
    const double di = d[id];
    if (di == 0.0) continue;
    for (std::size_t ic = 0; ic < c.size(); ++ic) {
      const std::size_t ie = id > ic ? id - ic : 0;
      e[ie] += di * c[ic];
    }
  }
  return ProbSeq(std::move(e), d.step());
}

ElSequence el_sequence(const ProbSeq& load, const ProbSeq& pv, const ProbSeq& wt) {
  require_same_step(load, pv);
  require_same_step(load, wt);
  ProbSeq e = sub_convolve(load, add_convolve(pv, wt));
  const double expected = load.expectation() - (pv.expectation() + wt.expectation());
  const double truncated = e.expectation();
  return ElSequence{std::move(e), expected, truncated};
}

void write_sequence_csv(std::ostream& out, const ProbSeq& s) {
  out << "index,power_kw,probability\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    fmt::print(out, "{},{},{}\n", i, s.power_at(i), s[i]);
  }
}

namespace detail {

std::size_t sequence_length_index(double p_max, double q) {
  const double ratio = p_max / q;
  // Guard against 120 / 2.5 landing a hair above 48 in floating point.
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(ratio));
}

ProbSeq normalise_bins(std::vector<double> masses, double q) {
  for (double& m : masses) m = std::max(m, 0.0);
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  if (!(total > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "distribution has no mass on its support");
  }
  for (double& m : masses) m /= total;
  return ProbSeq(std::move(masses), q);
}

}  // namespace detail
}  // namespace mgsched
