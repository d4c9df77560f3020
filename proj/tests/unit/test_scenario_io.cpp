#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mgsched/coordinator.hpp"
#include "mgsched/csv_io.hpp"
#include "mgsched/error.hpp"
#include "mgsched/scenario.hpp"

using namespace mgsched;
using doctest::Approx;

namespace {

const std::filesystem::path kBase = std::filesystem::path(MGSCHED_SOURCE_DIR) / "scenarios/paper_base.json";

std::string base_text() {
  std::ifstream in(kBase);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Applies an edit to the bundled scenario and returns the resulting error.
Error edited_error(const std::function<void(nlohmann::json&)>& edit) {
  auto j = nlohmann::json::parse(base_text());
  edit(j);
  try {
    parse_scenario(j.dump(2), "edited.json");
  } catch (const Error& e) {
    return e;
  }
  FAIL("edit was accepted");
  return Error(ErrorKind::io, "");
}

}  // namespace

TEST_CASE("bundled scenario carries the published constants") {
  const ScenarioConfig c = load_scenario(kBase);
  REQUIRE(c.units.size() == 3u);
  const double table[3][6] = {{1.2, 1.6, 0.35, 0.04, 5, 35}, {1.2, 1.6, 0.35, 0.04, 5, 30}, {1.0, 3.5, 0.26, 0.04, 10, 65}};
  for (int n = 0; n < 3; ++n) {
    const MtUnit& u = c.units[n];
    CHECK(u.fixed_cost == table[n][0]);
    CHECK(u.startup_cost == table[n][1]);
    CHECK(u.fuel_slope == table[n][2]);
    CHECK(u.reserve_cost == table[n][3]);
    CHECK(u.p_min == table[n][4]);
    CHECK(u.p_max == table[n][5]);
  }
  CHECK(c.ess.soc_max == 160.0);
  CHECK(c.ess.soc_min == 32.0);
  CHECK(c.ess.p_ch_max == 40.0);
  CHECK(c.ess.eta_ch == 0.95);
  CHECK(c.ess.charge_price == 0.3);
  CHECK(c.ess.discharge_price == 0.5);
  CHECK(c.ess.reserve_price == 0.02);
  CHECK(c.pv[12].eta == 0.093);
  CHECK(c.pv[12].area == 1300.0);
  CHECK(c.wt[0].v_in == 3.0);
  CHECK(c.wt[0].v_rated == 15.0);
  CHECK(c.wt[0].v_out == 25.0);
  CHECK(c.wt[0].p_rated == 60.0);
  CHECK(c.load[0].p_max == 195.0);
  CHECK(c.load[0].fluctuation == 0.1);
  CHECK(c.pricing.ref_el == 51.5);
  CHECK(c.pricing.ref_price == 0.6);
  CHECK(c.pricing.max_iters == 20);
  CHECK(c.jaya.population == 100);
  CHECK(c.jaya.max_iters == 1500);
  CHECK(c.ipm.gap_tolerance == 1e-5);
  CHECK(c.gamma == 0.95);
  CHECK(c.dr.ratio == 0.2);
  CHECK(c.step == 2.5);
  for (int h = 0; h < 24; ++h) {
    const double expected = (h == 6 || h == 18) ? 0.17 : (h >= 11 && h <= 14) ? 0.83 : 0.62;
    CHECK(c.pricing.tou[h] == expected);
    if (h < 6 || h > 18) CHECK(c.pv[h].p_max == 0.0);
  }
}

TEST_CASE("validation errors name the field and its line") {
  const Error e = edited_error([](auto& j) { j["step_kw"] = -2.5; });
  CHECK(e.kind() == ErrorKind::validation);
  const std::string msg = e.what();
  CHECK(msg.find("step_kw") != std::string::npos);
  CHECK(msg.find("q") != std::string::npos);
  CHECK(msg.find("edited.json:") != std::string::npos);

  const Error m = edited_error([](auto& j) { j["micro_turbines"][1]["p_min_kw"] = 50.0; });
  CHECK(std::string(m.what()).find("/micro_turbines/1/p_min_kw") != std::string::npos);

  const Error len = edited_error([](auto& j) { j["load"]["mu_kw"].erase(0); });
  CHECK(std::string(len.what()).find("/load/mu_kw") != std::string::npos);

  const Error missing = edited_error([](auto& j) { j["ess"].erase("soc_max_kwh"); });
  CHECK(std::string(missing.what()).find("missing") != std::string::npos);
}

TEST_CASE("line numbers point at the offending value") {
  const std::string text = "{\n  \"periods\": 1,\n  \"step_kw\":\n    -1\n}\n";
  try {
    parse_scenario(text, "tiny.json");
  } catch (const Error& e) {
    // Missing fields surface first; what matters is the line prefix format.
    CHECK(std::string(e.what()).rfind("tiny.json", 0) == 0);
  }
  auto j = nlohmann::json::parse(base_text());
  j["gamma"] = 1.5;
  const std::string dumped = j.dump(2);
  int line = 1;
  for (std::size_t i = 0; i < dumped.find("\"gamma\""); ++i) line += dumped[i] == '\n';
  try {
    parse_scenario(dumped, "g.json");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("g.json:" + std::to_string(line) + ":") == 0);
  }
}

TEST_CASE("malformed documents are parse errors with a position") {
  try {
    parse_scenario("{\n  \"periods\": 24,\n  oops\n}", "bad.json");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), Error);
}

TEST_CASE("schedule csv round trip reproduces the cost exactly") {
  ScenarioConfig cfg = load_scenario(kBase);
  cfg.jaya.population = 10;
  cfg.jaya.max_iters = 30;
  const Study study(cfg);
  const StrategyResult r = run_mg_only(study, RunOptions{1, 1});
  const DispatchContext ctx = study.dispatch_context(r.plan.served_profile(), r.prices);
  std::stringstream csv;
  write_schedule_csv(csv, r.schedule, ctx, study.expected_el());
  const ScheduleFile f = read_schedule_csv(csv);
  CHECK(f.schedule == r.schedule);
  CHECK(f.unit_names == std::vector<std::string>{"MT1", "MT2", "MT3"});
  DispatchContext back = study.dispatch_context(f.demand, f.price);
  back.reserve_req = f.reserve_req;
  CHECK(check_feasible(f.schedule, back).empty());
  CHECK(std::abs(evaluate_cost(f.schedule, back).total() - r.f1) <= 1e-6);

  std::stringstream broken("t,demand_kw\n1,2\n");
  CHECK_THROWS_AS(read_schedule_csv(broken), Error);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456.789, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(-0.0) == "0");
}
