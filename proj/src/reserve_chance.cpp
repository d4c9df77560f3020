#include "mgsched/reserve_chance.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace mgsched {

void ChanceCheck::validate() const {
  // gamma = 0 is accepted and means "no reserve requirement".
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorKind::invalid_argument,
                fmt::format("confidence level {} outside [0, 1]", gamma));
  }
}

double achieved_confidence(const ChanceCheck& check, double total_reserve) {
  const ProbSeq& e = check.el_seq;
  double covered = 0.0;
  for (std::size_t u = 0; u < e.size(); ++u) {
    if (!(total_reserve >= e.power_at(u) - check.expected_el)) break;
    covered += e[u];
  }
  return covered;
}

double min_reserve(const ChanceCheck& check) {
  check.validate();
  if (check.gamma == 0.0) return 0.0;
  const ProbSeq& e = check.el_seq;
  double cumulative = 0.0;
  std::size_t u_star = e.max_index();
  for (std::size_t u = 0; u < e.size(); ++u) {
    cumulative += e[u];
    if (cumulative >= check.gamma) {
      u_star = u;
      break;
    }
  }
  return std::max(0.0, e.power_at(u_star) - check.expected_el);
}

}  // namespace mgsched
