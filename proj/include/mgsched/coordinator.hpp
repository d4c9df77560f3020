#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mgsched/demand_response.hpp"
#include "mgsched/jaya_solver.hpp"
#include "mgsched/microgrid_model.hpp"
#include "mgsched/scenario.hpp"
#include "mgsched/sequence_ops.hpp"

namespace mgsched {

/// Discretised uncertainty of one period.
struct PeriodUncertainty {
  ProbSeq load;
  ProbSeq pv;
  ProbSeq wt;
  ElSequence el;
  double reserve_req;  // kW, smallest reserve meeting the confidence level
};

/// A scenario with its sequences and reserve requirements precomputed.
class Study {
 public:
  explicit Study(ScenarioConfig cfg);

  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<PeriodUncertainty>& periods() const { return periods_; }
  const std::vector<double>& expected_el() const { return expected_el_; }
  const std::vector<double>& reserve_req() const { return reserve_req_; }

  /// Shiftable-load bounds with the upper bound additionally capped by what
  /// the committed fleet can supply after reserve.
  DrConfig user_config() const;
  DispatchContext dispatch_context(const std::vector<double>& demand,
                                   const std::vector<double>& prices) const;

 private:
  ScenarioConfig cfg_;
  std::vector<PeriodUncertainty> periods_;
  std::vector<double> expected_el_;
  std::vector<double> reserve_req_;
};

enum class Mode { mg_only, bilevel, user_only };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

struct IterationRecord {
  int iter = 0;
  std::vector<double> prices;
  Schedule schedule;
  CostBreakdown cost;
  UserPlan plan;
  double f1_jo = 0.0;
  double f2_jo = 0.0;
  std::vector<TracePoint> trace;
};

struct StrategyResult {
  Mode mode = Mode::bilevel;
  double f1 = 0.0;  // MG net cost
  double f2 = 0.0;  // user cost
  std::vector<double> tou;
  std::vector<double> prices;  // prices the final scheme was computed under
  UserPlan plan;
  Schedule schedule;
  CostBreakdown cost;
  std::vector<TracePoint> trace;
  std::size_t evaluations = 0;
  // Bilevel only.
  std::vector<IterationRecord> records;
  std::optional<std::size_t> chosen;  // index into records
  double f1_io = 0.0;
  double f2_io = 0.0;
  bool stopped_early = false;

  const IterationRecord& chosen_record() const;
};

/// Real-time price: TOU on the first iteration, otherwise the profile scaled
/// against the reference load and price, floored at 0.
std::vector<double> update_price(const std::vector<double>& el_plus_move, double ref_el,
                                 double ref_price, const std::vector<double>& tou, int iter);

double selection_distance(const IterationRecord& r, double f1_io, double f2_io);

/// Record closest to (f1_io, f2_io); ties go to the lower iteration.
const IterationRecord& select_final(const std::vector<IterationRecord>& records, double f1_io,
                                    double f2_io);

struct RunOptions {
  std::uint64_t seed = 1;
  int workers = 1;
};

StrategyResult run_mg_only(const Study& study, const RunOptions& opts);
StrategyResult run_user_only(const Study& study, const RunOptions& opts);
/// Uses the anchors' F1 and F2 for the final-scheme selection.
StrategyResult run_bilevel(const Study& study, const RunOptions& opts, const StrategyResult& mg_only,
                           const StrategyResult& user_only);

/// Runs one mode; bilevel runs both single-level anchors first.
StrategyResult run_strategy(Mode mode, const Study& study, const RunOptions& opts);

}  // namespace mgsched
