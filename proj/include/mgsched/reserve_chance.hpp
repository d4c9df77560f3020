#pragma once

#include "mgsched/sequence_ops.hpp"

namespace mgsched {

/// Per-period reserve chance constraint over an equivalent-load sequence.
/// The coverage indicator for EL level u*q is "reserve >= u*q - expected_el",
/// so covered levels always form a prefix of the sequence.
struct ChanceCheck {
  double gamma;
  ProbSeq el_seq;
  double expected_el;

  void validate() const;
};

/// Probability mass of the EL outcomes that `total_reserve` covers.
double achieved_confidence(const ChanceCheck& check, double total_reserve);

/// Smallest reserve r >= 0 with achieved_confidence(check, r) >= gamma.
double min_reserve(const ChanceCheck& check);

}  // namespace mgsched
