#include "mgsched/csv_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "mgsched/error.hpp"

namespace mgsched {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // no "-0"
  return fmt::format("{}", v);
}

void write_schedule_csv(std::ostream& out, const Schedule& s, const DispatchContext& ctx,
                        const std::vector<double>& expected_el) {
  out << "t,demand_kw,price_per_kwh,expected_el_kw,reserve_req_kw";
  for (const auto& u : ctx.units) {
    out << ",on_" << u.name << ",start_" << u.name << ",p_" << u.name << "_kw,r_" << u.name << "_kw";
  }
  out << ",p_ch_kw,p_dc_kw,p_res_kw,p_ls_kw,soc_start_kwh,soc_end_kwh\n";
  for (int t = 0; t < s.periods; ++t) {
    out << t + 1 << ',' << format_double(ctx.demand[t]) << ',' << format_double(ctx.price[t]) << ','
        << format_double(expected_el[t]) << ',' << format_double(ctx.reserve_req[t]);
    for (int n = 0; n < s.units; ++n) {
      const auto i = s.at(t, n);
      out << ',' << int{s.on[i]} << ',' << int{s.start[i]} << ',' << format_double(s.p_mt[i]) << ','
          << format_double(s.r_mt[i]);
    }
    out << ',' << format_double(s.p_ch[t]) << ',' << format_double(s.p_dc[t]) << ','
        << format_double(s.p_res[t]) << ',' << format_double(s.p_ls[t]) << ','
        << format_double(s.soc[t]) << ',' << format_double(s.soc[t + 1]) << '\n';
  }
}

void write_plan_csv(std::ostream& out, const UserPlan& plan, const std::vector<double>& expected_el) {
  out << "t,expected_el_kw,price_per_kwh,p_un_kw,p_cn_kw,p_move_kw,served_kw\n";
  const auto served = plan.served_profile();
  for (std::size_t t = 0; t < plan.p_cn.size(); ++t) {
    out << t + 1 << ',' << format_double(expected_el[t]) << ',' << format_double(plan.price[t]) << ','
        << format_double(plan.p_un[t]) << ',' << format_double(plan.p_cn[t]) << ','
        << format_double(plan.p_move[t]) << ',' << format_double(served[t]) << '\n';
  }
}

void write_prices_csv(std::ostream& out, const StrategyResult& r) {
  out << "iter,t,tou_per_kwh,rt_per_kwh\n";
  auto rows = [&](int iter, const std::vector<double>& rt) {
    for (std::size_t t = 0; t < rt.size(); ++t) {
      out << iter << ',' << t + 1 << ',' << format_double(r.tou[t]) << ',' << format_double(rt[t]) << '\n';
    }
  };
  if (r.records.empty()) {
    rows(1, r.prices);
  } else {
    for (const auto& rec : r.records) rows(rec.iter, rec.prices);
  }
}

void write_convergence_csv(std::ostream& out, const StrategyResult& r) {
  out << "iter,f1,f2,distance,selected\n";
  if (r.records.empty()) {
    out << "1," << format_double(r.f1) << ',' << format_double(r.f2) << ",,1\n";
    return;
  }
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto& rec = r.records[i];
    out << rec.iter << ',' << format_double(rec.f1_jo) << ',' << format_double(rec.f2_jo) << ','
        << format_double(selection_distance(rec, r.f1_io, r.f2_io)) << ','
        << (r.chosen && *r.chosen == i ? 1 : 0) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "iteration,best_fitness,feasible_fraction\n";
  for (const auto& p : trace) {
    out << p.iteration << ',' << format_double(p.best_fitness) << ',' << format_double(p.feasible_fraction)
        << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::parse, fmt::format("schedule.csv line {}: '{}' is not a number", line, s));
  }
}

}  // namespace

ScheduleFile read_schedule_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::parse, "schedule.csv is empty");
  const auto header = split(line);
  constexpr std::size_t fixed_front = 5, fixed_back = 6;
  if (header.size() < fixed_front + fixed_back || (header.size() - fixed_front - fixed_back) % 4 != 0 ||
      header[0] != "t") {
    throw Error(ErrorKind::parse, "schedule.csv header has an unexpected layout");
  }
  ScheduleFile f;
  const int units = static_cast<int>((header.size() - fixed_front - fixed_back) / 4);
  for (int n = 0; n < units; ++n) f.unit_names.push_back(header[fixed_front + 4 * n].substr(3));

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::parse, fmt::format("schedule.csv line {}: expected {} cells, found {}", line_no,
                                                header.size(), cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(to_double(c, line_no));
    if (static_cast<int>(row[0]) != static_cast<int>(rows.size()) + 1) {
      throw Error(ErrorKind::parse, fmt::format("schedule.csv line {}: periods out of order", line_no));
    }
    rows.push_back(std::move(row));
  }
  const int T = static_cast<int>(rows.size());
  if (T == 0) throw Error(ErrorKind::parse, "schedule.csv has no periods");
  Schedule& s = f.schedule;
  s = Schedule(T, units);
  for (int t = 0; t < T; ++t) {
    const auto& row = rows[t];
    f.demand.push_back(row[1]);
    f.price.push_back(row[2]);
    f.expected_el.push_back(row[3]);
    f.reserve_req.push_back(row[4]);
    for (int n = 0; n < units; ++n) {
      const std::size_t c = fixed_front + 4 * n;
      s.on[s.at(t, n)] = static_cast<std::uint8_t>(row[c]);
      s.start[s.at(t, n)] = static_cast<std::uint8_t>(row[c + 1]);
      s.p_mt[s.at(t, n)] = row[c + 2];
      s.r_mt[s.at(t, n)] = row[c + 3];
    }
    const std::size_t b = fixed_front + 4 * units;
    s.p_ch[t] = row[b];
    s.p_dc[t] = row[b + 1];
    s.p_res[t] = row[b + 2];
    s.p_ls[t] = row[b + 3];
    s.soc[t] = row[b + 4];
    if (t == T - 1) s.soc[T] = row[b + 5];
  }
  return f;
}

}  // namespace mgsched
