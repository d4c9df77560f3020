#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mgsched/coordinator.hpp"

namespace mgsched {

// All writers emit a header row, `t` counting from 1, and doubles with
// round-trip precision.

void write_schedule_csv(std::ostream& out, const Schedule& s, const DispatchContext& ctx,
                        const std::vector<double>& expected_el);
void write_plan_csv(std::ostream& out, const UserPlan& plan, const std::vector<double>& expected_el);
/// Long format: one row per (pricing iteration, period).
void write_prices_csv(std::ostream& out, const StrategyResult& r);
/// One row per pricing iteration with both objectives and the selection distance.
void write_convergence_csv(std::ostream& out, const StrategyResult& r);
/// Jaya best-fitness trace of the reported schedule.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

/// What schedule.csv carries, enough to re-score it.
struct ScheduleFile {
  Schedule schedule;
  std::vector<std::string> unit_names;
  std::vector<double> demand;
  std::vector<double> price;
  std::vector<double> expected_el;
  std::vector<double> reserve_req;
};

/// Parses what write_schedule_csv produced. Throws Error(parse).
ScheduleFile read_schedule_csv(std::istream& in);

std::string format_double(double v);

}  // namespace mgsched
