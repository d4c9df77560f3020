// mgsched: run microgrid scheduling strategies on a scenario file.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mgsched/coordinator.hpp"
#include "mgsched/csv_io.hpp"
#include "mgsched/error.hpp"
#include "mgsched/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mgsched;

namespace {

struct Overrides {
  std::optional<double> gamma, ratio, step;
  std::optional<int> population, jaya_iters, pricing_iters;
};

struct Sweep {
  std::string name;
  std::vector<double> values;
};

Sweep parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw Error(ErrorKind::invalid_argument, "sweep must look like name=start:stop:step");
  Sweep s;
  s.name = spec.substr(0, eq);
  if (s.name != "gamma" && s.name != "ratio" && s.name != "step" && s.name != "seed") {
    throw Error(ErrorKind::invalid_argument, fmt::format("cannot sweep '{}'; use gamma, ratio, step or seed", s.name));
  }
  double a = 0, b = 0, h = 0;
  if (std::sscanf(spec.c_str() + eq + 1, "%lf:%lf:%lf", &a, &b, &h) != 3 || !(h > 0.0) || b < a) {
    throw Error(ErrorKind::invalid_argument, "sweep range must be start:stop:step with step > 0 and stop >= start");
  }
  const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
  for (long i = 0; i <= n; ++i) {
    // Strip accumulated rounding so 0.5 + 3 * 0.05 reads back as 0.65.
    s.values.push_back(std::stod(fmt::format("{:.12g}", a + static_cast<double>(i) * h)));
  }
  return s;
}

ScenarioConfig apply(ScenarioConfig cfg, const Overrides& o) {
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.ratio) cfg.dr.ratio = *o.ratio;
  if (o.step) cfg.step = *o.step;
  if (o.population) cfg.jaya.population = *o.population;
  if (o.jaya_iters) cfg.jaya.max_iters = *o.jaya_iters;
  if (o.pricing_iters) cfg.pricing.max_iters = *o.pricing_iters;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::validation, fmt::format("after command-line overrides: {}", e.what()));
  }
  return cfg;
}

std::vector<Mode> modes_for(const std::string& strategy) {
  if (strategy == "all") return {Mode::mg_only, Mode::bilevel, Mode::user_only};
  return {parse_mode(strategy)};
}

struct RunSet {
  std::optional<StrategyResult> mg, user, bi;
  double seconds = 0.0;

  const StrategyResult& get(Mode m) const {
    switch (m) {
      case Mode::mg_only: return *mg;
      case Mode::user_only: return *user;
      case Mode::bilevel: return *bi;
    }
    return *bi;
  }
};

RunSet run_modes(const Study& study, const std::vector<Mode>& modes, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RunSet rs;
  const bool need_bi = std::find(modes.begin(), modes.end(), Mode::bilevel) != modes.end();
  for (Mode m : modes) {
    if (m == Mode::mg_only || need_bi) rs.mg = rs.mg ? rs.mg : run_mg_only(study, opts);
    if (m == Mode::user_only || need_bi) rs.user = rs.user ? rs.user : run_user_only(study, opts);
  }
  if (need_bi) rs.bi = run_bilevel(study, opts, *rs.mg, *rs.user);
  rs.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rs;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, fmt::format("cannot write {}", path.string()));
  out << text;
}

template <typename F>
std::string render(F&& f) {
  std::ostringstream ss;
  f(ss);
  return ss.str();
}

ordered_json strategy_summary(const StrategyResult& r, const Study& study) {
  const ScenarioConfig& cfg = study.config();
  ordered_json j;
  j["strategy"] = std::string(to_string(r.mode));
  j["f1_mg_net_cost"] = r.f1;
  j["mg_net_revenue"] = -r.f1;
  j["f2_user_cost"] = r.f2;
  if (r.mode == Mode::bilevel) {
    j["selected_iteration"] = r.chosen_record().iter;
    j["selection_distance"] = selection_distance(r.chosen_record(), r.f1_io, r.f2_io);
    j["f1_io"] = r.f1_io;
    j["f2_io"] = r.f2_io;
    j["pricing_iterations"] = r.records.size();
    j["stopped_early"] = r.stopped_early;
  }
  j["cost_breakdown"] = {{"revenue", r.cost.revenue},       {"ess", r.cost.ess},
                         {"mt", r.cost.mt},                 {"ess_reserve", r.cost.ess_reserve},
                         {"shedding", r.cost.shedding}};
  double shed = 0.0;
  double min_margin = INFINITY;
  std::vector<double> margins;
  const Schedule& s = r.schedule;
  for (int t = 0; t < s.periods; ++t) {
    shed += s.p_ls[t] * cfg.dt;
    double reserve = s.p_res[t];
    for (int n = 0; n < s.units; ++n) reserve += s.r_mt[s.at(t, n)];
    margins.push_back(reserve - study.reserve_req()[t]);
    min_margin = std::min(min_margin, margins.back());
  }
  j["shed_energy_kwh"] = shed;
  j["min_reserve_margin_kw"] = min_margin;
  j["reserve_margin_kw"] = margins;
  j["jaya_evaluations"] = r.evaluations;
  const auto served = r.plan.served_profile();
  j["served_profile_kw"] = served;
  const auto feas = check_feasible(s, study.dispatch_context(served, r.prices));
  j["feasible"] = feas.empty();
  return j;
}

// Writes one strategy's artifacts into `dir`; returns the file names.
std::vector<std::string> write_strategy(const fs::path& dir, const StrategyResult& r, const Study& study) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  const auto& el = study.expected_el();
  write_file(dir / "plan.csv", render([&](auto& o) { write_plan_csv(o, r.plan, el); }));
  files.push_back("plan.csv");
  if (r.mode != Mode::user_only) {
    const DispatchContext ctx = study.dispatch_context(r.plan.served_profile(), r.prices);
    write_file(dir / "schedule.csv", render([&](auto& o) { write_schedule_csv(o, r.schedule, ctx, el); }));
    write_file(dir / "prices.csv", render([&](auto& o) { write_prices_csv(o, r); }));
    write_file(dir / "convergence.csv", render([&](auto& o) { write_convergence_csv(o, r); }));
    write_file(dir / "jaya_trace.csv", render([&](auto& o) { write_trace_csv(o, r.trace); }));
    files.insert(files.end(), {"schedule.csv", "prices.csv", "convergence.csv", "jaya_trace.csv"});
  }
  return files;
}

void dump_sequences(const fs::path& dir, const Study& study) {
  fs::create_directories(dir);
  const auto& ps = study.periods();
  for (std::size_t t = 0; t < ps.size(); ++t) {
    const auto tag = fmt::format("{:02}", t + 1);
    write_file(dir / ("load_t" + tag + ".csv"), render([&](auto& o) { write_sequence_csv(o, ps[t].load); }));
    write_file(dir / ("pv_t" + tag + ".csv"), render([&](auto& o) { write_sequence_csv(o, ps[t].pv); }));
    write_file(dir / ("wt_t" + tag + ".csv"), render([&](auto& o) { write_sequence_csv(o, ps[t].wt); }));
    write_file(dir / ("el_t" + tag + ".csv"), render([&](auto& o) { write_sequence_csv(o, ps[t].el.seq); }));
  }
}

ordered_json scenario_summary(const ScenarioConfig& cfg, std::uint64_t seed) {
  return {{"scenario", cfg.name}, {"seed", seed},       {"gamma", cfg.gamma},
          {"ratio", cfg.dr.ratio}, {"step_kw", cfg.step}, {"periods", cfg.periods}};
}

void run_single(const ScenarioConfig& cfg, const std::vector<Mode>& modes, const RunOptions& opts,
                const fs::path& out, bool dump_seqs) {
  const Study study(cfg);
  const RunSet rs = run_modes(study, modes, opts);
  fs::create_directories(out);
  ordered_json summary = scenario_summary(cfg, opts.seed);
  summary["reserve_req_kw"] = study.reserve_req();
  summary["expected_el_kw"] = study.expected_el();
  ordered_json strategies = ordered_json::array();
  for (Mode m : modes) {
    const StrategyResult& r = rs.get(m);
    const fs::path dir = modes.size() == 1 ? out : out / std::string(to_string(m));
    ordered_json js = strategy_summary(r, study);
    ordered_json files = ordered_json::array();
    const std::string prefix = modes.size() == 1 ? "" : std::string(to_string(m)) + "/";
    for (const auto& f : write_strategy(dir, r, study)) files.push_back(prefix + f);
    js["artifacts"] = files;
    strategies.push_back(js);
  }
  summary["strategies"] = strategies;
  if (dump_seqs) dump_sequences(out / "sequences", study);
  write_file(out / "summary.json", summary.dump(2) + "\n");
  // Wall-clock time lives apart from summary.json so repeated runs stay byte-identical.
  write_file(out / "timing.json", ordered_json{{"wall_clock_seconds", rs.seconds}}.dump(2) + "\n");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void run_sweep(const ScenarioConfig& base, const Overrides& ov, const Sweep& sweep,
               const std::vector<Mode>& modes, std::uint64_t seed, int repeats, int jobs,
               const fs::path& out) {
  struct Job {
    std::size_t point;
    std::uint64_t seed;
  };
  std::vector<Job> work;
  for (std::size_t p = 0; p < sweep.values.size(); ++p) {
    for (int k = 0; k < repeats; ++k) work.push_back({p, seed + static_cast<std::uint64_t>(k)});
  }
  // [job][mode] -> (f1, f2)
  std::vector<std::vector<std::pair<double, double>>> results(work.size());
  std::vector<double> seconds(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < work.size();) {
      const Job& job = work[i];
      const double v = sweep.values[job.point];
      Overrides o = ov;
      std::uint64_t run_seed = job.seed;
      if (sweep.name == "gamma") o.gamma = v;
      if (sweep.name == "ratio") o.ratio = v;
      if (sweep.name == "step") o.step = v;
      if (sweep.name == "seed") run_seed = static_cast<std::uint64_t>(v) + (job.seed - seed);
      const Study study(apply(base, o));
      const RunSet rs = run_modes(study, modes, RunOptions{run_seed, 1});
      for (Mode m : modes) results[i].push_back({rs.get(m).f1, rs.get(m).f2});
      seconds[i] = rs.seconds;
    }
  };
  std::vector<std::future<void>> pool;
  for (int w = 0; w < std::max(1, jobs); ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();

  fs::create_directories(out);
  std::string header = sweep.name;
  for (Mode m : modes) header += fmt::format(",f1_{0},f2_{0}", to_string(m));
  std::string csv = header + ",repeats\n";
  std::string runs = sweep.name + ",seed" + header.substr(sweep.name.size()) + "\n";
  for (std::size_t p = 0; p < sweep.values.size(); ++p) {
    csv += format_double(sweep.values[p]);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      std::vector<double> f1, f2;
      for (std::size_t i = 0; i < work.size(); ++i) {
        if (work[i].point != p) continue;
        f1.push_back(results[i][m].first);
        f2.push_back(results[i][m].second);
      }
      csv += "," + format_double(median(f1)) + "," + format_double(median(f2));
    }
    csv += fmt::format(",{}\n", repeats);
  }
  ordered_json timing = ordered_json::array();
  for (std::size_t i = 0; i < work.size(); ++i) {
    runs += format_double(sweep.values[work[i].point]) + fmt::format(",{}", work[i].seed);
    for (const auto& [f1, f2] : results[i]) runs += "," + format_double(f1) + "," + format_double(f2);
    runs += "\n";
    timing.push_back({{sweep.name, sweep.values[work[i].point]}, {"seed", work[i].seed}, {"seconds", seconds[i]}});
  }
  write_file(out / "sweep.csv", csv);
  write_file(out / "sweep_runs.csv", runs);
  write_file(out / "timing.json", timing.dump(2) + "\n");
  ordered_json summary = scenario_summary(base, seed);
  summary["sweep"] = sweep.name;
  summary["points"] = sweep.values;
  summary["repeats"] = repeats;
  summary["artifacts"] = {"sweep.csv", "sweep_runs.csv"};
  write_file(out / "summary.json", summary.dump(2) + "\n");
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return 3;
    case ErrorKind::validation: return 4;
    case ErrorKind::io: return 5;
    case ErrorKind::invalid_argument: return 2;
    default: return 6;  // solver-side failures
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chance-constrained bi-level microgrid scheduling"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run one or more strategies on a scenario");

  std::string scenario, strategy = "bilevel", sweep_spec, out;
  Overrides ov;
  std::uint64_t seed = 1;
  int jobs = 1, repeats = 1;
  bool dump_seqs = false;
  run->add_option("--scenario", scenario, "scenario JSON file")->required();
  run->add_option("--strategy", strategy, "mg_only | bilevel | user_only | all")
      ->check(CLI::IsMember({"mg_only", "bilevel", "user_only", "all"}));
  run->add_option("--gamma", ov.gamma, "reserve confidence level");
  run->add_option("--ratio", ov.ratio, "time-shiftable share of the load");
  run->add_option("--step", ov.step, "discretisation step (kW)");
  run->add_option("--seed", seed, "Jaya seed");
  run->add_option("--sweep", sweep_spec, "name=start:stop:step over gamma, ratio, step or seed");
  run->add_option("--repeats", repeats, "seeds per sweep point (seed, seed+1, ...)")->check(CLI::PositiveNumber);
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--population", ov.population, "override Jaya population");
  run->add_option("--jaya-iters", ov.jaya_iters, "override Jaya iterations");
  run->add_option("--pricing-iters", ov.pricing_iters, "override pricing iterations");
  run->add_flag("--dump-seqs", dump_seqs, "write per-period probability sequences");
  run->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc != 0) std::cerr << ordered_json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return rc == 0 ? 0 : 2;
  }

  try {
    const ScenarioConfig base = load_scenario(scenario);
    const auto modes = modes_for(strategy);
    if (sweep_spec.empty()) {
      run_single(apply(base, ov), modes, RunOptions{seed, jobs}, out, dump_seqs);
    } else {
      run_sweep(base, ov, parse_sweep(sweep_spec), modes, seed, repeats, jobs, out);
    }
  } catch (const Error& e) {
    std::cerr << ordered_json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << ordered_json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
