#include "mgsched/scenario.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "mgsched/error.hpp"

namespace mgsched {
namespace {

using nlohmann::json;

// Maps each JSON pointer in a document to the line its value starts on. The
// document has already been accepted by nlohmann, so this scan only needs to
// follow structure, not validate it.
std::map<std::string, int> index_lines(const std::string& text) {
  std::map<std::string, int> lines;
  struct Frame {
    std::string pointer;
    bool is_array;
    int next_index;
    std::string pending_key;
  };
  std::vector<Frame> stack;
  int line = 1;
  std::string last_string;
  bool expecting_key = false;

  auto child_pointer = [&]() -> std::string {
    if (stack.empty()) return "";
    Frame& f = stack.back();
    if (f.is_array) return f.pointer + "/" + std::to_string(f.next_index);
    return f.pointer + "/" + f.pending_key;
  };
  auto mark_value = [&]() {
    const std::string p = child_pointer();
    lines.emplace(p, line);
    return p;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
    } else if (ch == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\') ++i;
        if (i < text.size()) s += text[i];
      }
      if (expecting_key) {
        stack.back().pending_key = s;
        expecting_key = false;
      } else {
        mark_value();
      }
    } else if (ch == '{' || ch == '[') {
      const std::string p = mark_value();
      stack.push_back({p, ch == '[', 0, {}});
      expecting_key = ch == '{';
    } else if (ch == '}' || ch == ']') {
      stack.pop_back();
      expecting_key = false;
    } else if (ch == ',') {
      if (!stack.empty()) {
        if (stack.back().is_array) ++stack.back().next_index;
        else expecting_key = true;
      }
    } else if (!std::isspace(static_cast<unsigned char>(ch)) && ch != ':') {
      mark_value();
      while (i + 1 < text.size() && std::string_view(",]}\n \t\r").find(text[i + 1]) == std::string_view::npos) ++i;
    }
  }
  return lines;
}

class Reader {
 public:
  Reader(const json& root, std::map<std::string, int> lines, std::string source)
      : root_(root), lines_(std::move(lines)), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
    std::string where = source_;
    std::string probe = pointer;
    while (true) {
      if (auto it = lines_.find(probe); it != lines_.end()) {
        where += fmt::format(":{}", it->second);
        break;
      }
      const auto slash = probe.rfind('/');
      if (slash == std::string::npos || probe.empty()) break;
      probe = probe.substr(0, slash);
    }
    const std::string field = pointer.empty() ? "/" : pointer;
    throw Error(ErrorKind::validation, fmt::format("{}: field '{}' {}", where, field, what));
  }

  const json& node(const std::string& pointer) const {
    const json::json_pointer ptr(pointer);
    if (!root_.contains(ptr)) fail(pointer, "is missing");
    return root_.at(ptr);
  }
  bool has(const std::string& pointer) const { return root_.contains(json::json_pointer(pointer)); }

  double number(const std::string& pointer) const {
    const json& v = node(pointer);
    if (!v.is_number()) fail(pointer, "must be a number");
    return v.get<double>();
  }
  double number_or(const std::string& pointer, double fallback) const {
    return has(pointer) ? number(pointer) : fallback;
  }
  int integer(const std::string& pointer) const {
    const json& v = node(pointer);
    if (!v.is_number_integer()) fail(pointer, "must be an integer");
    return v.get<int>();
  }
  int integer_or(const std::string& pointer, int fallback) const {
    return has(pointer) ? integer(pointer) : fallback;
  }
  std::string string_or(const std::string& pointer, const std::string& fallback) const {
    if (!has(pointer)) return fallback;
    const json& v = node(pointer);
    if (!v.is_string()) fail(pointer, "must be a string");
    return v.get<std::string>();
  }
  std::vector<double> series(const std::string& pointer, int length) const {
    const json& v = node(pointer);
    if (!v.is_array()) fail(pointer, "must be an array");
    if (static_cast<int>(v.size()) != length) {
      fail(pointer, fmt::format("must have {} entries (one per period), found {}", length, v.size()));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(fmt::format("{}/{}", pointer, i)));
    return out;
  }
  void check(bool ok, const std::string& pointer, const std::string& what) const {
    if (!ok) fail(pointer, what);
  }

 private:
  const json& root_;
  std::map<std::string, int> lines_;
  std::string source_;
};

// Field-level invariants, each reported against the field that breaks it.
void validate_fields(const ScenarioConfig& c, const Reader& r) {
  const int T = c.periods;
  r.check(T >= 1, "/periods", "must be >= 1");
  r.check(c.dt > 0.0, "/dt_h", "must be > 0");
  r.check(c.step > 0.0, "/step_kw", "(discretisation step q) must be > 0");
  r.check(c.gamma >= 0.0 && c.gamma <= 1.0, "/gamma", "must lie in [0, 1]");
  r.check(c.shed_penalty >= 0.0, "/shed_penalty_per_kwh", "must be >= 0");
  for (int t = 0; t < T; ++t) {
    const PvModel& pv = c.pv[t];
    r.check(pv.lambda1 > 0.0, fmt::format("/pv/lambda1/{}", t), "must be > 0");
    r.check(pv.lambda2 > 0.0, fmt::format("/pv/lambda2/{}", t), "must be > 0");
    r.check(pv.p_max >= 0.0, fmt::format("/pv/p_max_kw/{}", t), "must be >= 0");
    const WtModel& wt = c.wt[t];
    r.check(wt.k > 0.0, fmt::format("/wt/shape_k/{}", t), "must be > 0");
    r.check(wt.scale > 0.0, fmt::format("/wt/scale_m_s/{}", t), "must be > 0");
    const LoadModel& ld = c.load[t];
    r.check(ld.mu >= 0.0, fmt::format("/load/mu_kw/{}", t), "must be >= 0");
    r.check(ld.sigma >= 0.0, "/load", fmt::format("gives a negative sigma at period {}", t + 1));
    r.check(c.pricing.tou[t] >= 0.0, fmt::format("/pricing/tou_per_kwh/{}", t), "must be >= 0");
  }
  if (T > 0) {
    const PvModel& pv = c.pv[0];
    r.check(pv.eta > 0.0 && pv.eta <= 1.0, "/pv/eta", "must lie in (0, 1]");
    r.check(pv.area > 0.0, "/pv/area_m2", "must be > 0");
    r.check(pv.r_max > 0.0, "/pv/r_max_w_m2", "must be > 0");
    const WtModel& wt = c.wt[0];
    r.check(wt.v_in > 0.0 && wt.v_in < wt.v_rated && wt.v_rated < wt.v_out, "/wt",
            "speeds must satisfy 0 < v_in < v_rated < v_out");
    r.check(wt.p_rated > 0.0, "/wt/p_rated_kw", "must be > 0");
    r.check(c.load[0].p_max > 0.0, "/load/p_max_kw", "must be > 0");
  }
  r.check(!c.units.empty(), "/micro_turbines", "must list at least one unit");
  for (std::size_t n = 0; n < c.units.size(); ++n) {
    const MtUnit& u = c.units[n];
    const std::string base = fmt::format("/micro_turbines/{}", n);
    r.check(u.p_min >= 0.0 && u.p_min <= u.p_max, base + "/p_min_kw", "must satisfy 0 <= p_min <= p_max");
    r.check(u.fixed_cost >= 0.0, base + "/fixed_cost", "must be >= 0");
    r.check(u.startup_cost >= 0.0, base + "/startup_cost", "must be >= 0");
    r.check(u.fuel_slope >= 0.0, base + "/fuel_cost_per_kwh", "must be >= 0");
    r.check(u.reserve_cost >= 0.0, base + "/reserve_cost_per_kwh", "must be >= 0");
  }
  const EssConfig& e = c.ess;
  r.check(e.eta_ch > 0.0 && e.eta_ch <= 1.0, "/ess/eta_ch", "must lie in (0, 1]");
  r.check(e.eta_dc > 0.0 && e.eta_dc <= 1.0, "/ess/eta_dc", "must lie in (0, 1]");
  r.check(e.soc_min <= e.soc_max, "/ess/soc_min_kwh", "must not exceed soc_max_kwh");
  r.check(e.soc_min <= e.soc_init && e.soc_init <= e.soc_max, "/ess/soc_init_kwh",
          "must lie within [soc_min_kwh, soc_max_kwh]");
  r.check(e.p_ch_max >= 0.0, "/ess/p_ch_max_kw", "must be >= 0");
  r.check(e.p_dc_max >= 0.0, "/ess/p_dc_max_kw", "must be >= 0");
  r.check(e.charge_price >= 0.0 && e.discharge_price >= 0.0 && e.reserve_price >= 0.0, "/ess",
          "prices must be >= 0");
  r.check(c.dr.ratio > 0.0 && c.dr.ratio < 1.0, "/demand_response/ratio", "must lie in (0, 1)");
  for (std::size_t t = 0; t < c.dr.p_cn_min.size(); ++t) {
    r.check(c.dr.p_cn_min[t] >= 0.0 && c.dr.p_cn_min[t] <= c.dr.p_cn_max[t],
            fmt::format("/demand_response/p_cn_min_kw/{}", t), "must satisfy 0 <= min <= max");
  }
  r.check(c.pricing.ref_price >= 0.0, "/pricing/ref_price_per_kwh", "must be >= 0");
  r.check(c.pricing.ref_el > 0.0, "/pricing/ref_el_kw", "must be > 0");
  r.check(c.pricing.max_iters >= 1, "/pricing/max_iters", "must be >= 1");
  r.check(c.pricing.stability_tol >= 0.0, "/pricing/stability_tol_per_kwh", "must be >= 0");
  r.check(c.jaya.population >= 2, "/jaya/population", "must be >= 2");
  r.check(c.jaya.max_iters >= 1, "/jaya/iterations", "must be >= 1");
  r.check(c.ipm.gap_tolerance > 0.0, "/ipm/gap_tolerance", "must be > 0");
  r.check(c.ipm.max_iters >= 1, "/ipm/max_iters", "must be >= 1");
  r.check(c.ipm.initial_point_margin > 0.0, "/ipm/initial_point_margin", "must be > 0");
}

}  // namespace

void ScenarioConfig::validate() const {
  const auto T = static_cast<std::size_t>(periods);
  if (periods < 1 || pv.size() != T || wt.size() != T || load.size() != T || pricing.tou.size() != T) {
    throw Error(ErrorKind::validation, "scenario arrays must all have one entry per period");
  }
  if (!(step > 0.0)) throw Error(ErrorKind::validation, "field 'step_kw' must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorKind::validation, "field 'gamma' must lie in [0, 1]");
  try {
    for (const auto& m : pv) m.validate();
    for (const auto& m : wt) m.validate();
    for (const auto& m : load) m.validate();
    for (const auto& u : units) u.validate();
    ess.validate();
    dr.validate();
    jaya.validate();
    ipm.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::validation, e.what());
  }
  if (units.empty()) throw Error(ErrorKind::validation, "scenario needs at least one micro-turbine");
  if (!(pricing.ref_el > 0.0)) throw Error(ErrorKind::validation, "field 'ref_el_kw' must be > 0");
  if (pricing.max_iters < 1) throw Error(ErrorKind::validation, "field 'pricing.max_iters' must be >= 1");
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, fmt::format("{}: {}", source, e.what()));
  }
  const Reader r(root, index_lines(text), source);
  r.check(root.is_object(), "", "must be an object");

  ScenarioConfig c;
  c.name = r.string_or("/name", source);
  c.periods = r.integer("/periods");
  r.check(c.periods >= 1, "/periods", "must be >= 1");
  const int T = c.periods;
  c.dt = r.number_or("/dt_h", 1.0);
  c.step = r.number("/step_kw");
  c.gamma = r.number("/gamma");
  c.shed_penalty = r.number_or("/shed_penalty_per_kwh", 10.0);

  {
    const auto p_max = r.series("/pv/p_max_kw", T);
    const auto l1 = r.series("/pv/lambda1", T);
    const auto l2 = r.series("/pv/lambda2", T);
    const double eta = r.number("/pv/eta");
    const double area = r.number("/pv/area_m2");
    const double r_max = r.number("/pv/r_max_w_m2");
    const double capacity = r.number_or("/pv/capacity_kw", INFINITY);
    for (int t = 0; t < T; ++t) {
      r.check(p_max[t] <= capacity, fmt::format("/pv/p_max_kw/{}", t), "must not exceed capacity_kw");
      c.pv.push_back(PvModel{l1[t], l2[t], p_max[t], eta, area, r_max});
    }
  }
  {
    const auto k = r.series("/wt/shape_k", T);
    const auto scale = r.series("/wt/scale_m_s", T);
    const double v_in = r.number("/wt/v_in_m_s");
    const double v_rated = r.number("/wt/v_rated_m_s");
    const double v_out = r.number("/wt/v_out_m_s");
    const double p_rated = r.number("/wt/p_rated_kw");
    for (int t = 0; t < T; ++t) c.wt.push_back(WtModel{k[t], scale[t], v_in, v_rated, v_out, p_rated});
  }
  {
    const auto mu = r.series("/load/mu_kw", T);
    const double p_max = r.number("/load/p_max_kw");
    const double fluctuation = r.number_or("/load/fluctuation", 0.0);
    r.check(fluctuation >= 0.0, "/load/fluctuation", "must be >= 0");
    std::vector<double> sigma;
    if (r.has("/load/sigma_kw")) sigma = r.series("/load/sigma_kw", T);
    for (int t = 0; t < T; ++t) {
      LoadModel m = LoadModel::from_fluctuation(mu[t], fluctuation, p_max);
      if (!sigma.empty()) m.sigma = sigma[t];
      c.load.push_back(m);
    }
  }
  {
    const json& units = r.node("/micro_turbines");
    r.check(units.is_array(), "/micro_turbines", "must be an array");
    for (std::size_t n = 0; n < units.size(); ++n) {
      const std::string base = fmt::format("/micro_turbines/{}", n);
      MtUnit u;
      u.name = r.string_or(base + "/name", fmt::format("MT{}", n + 1));
      u.fixed_cost = r.number(base + "/fixed_cost");
      u.startup_cost = r.number(base + "/startup_cost");
      u.fuel_slope = r.number(base + "/fuel_cost_per_kwh");
      u.reserve_cost = r.number(base + "/reserve_cost_per_kwh");
      u.p_min = r.number(base + "/p_min_kw");
      u.p_max = r.number(base + "/p_max_kw");
      c.units.push_back(u);
    }
  }
  {
    EssConfig& e = c.ess;
    e.p_ch_max = r.number("/ess/p_ch_max_kw");
    e.p_dc_max = r.number("/ess/p_dc_max_kw");
    e.eta_ch = r.number("/ess/eta_ch");
    e.eta_dc = r.number("/ess/eta_dc");
    e.soc_min = r.number("/ess/soc_min_kwh");
    e.soc_max = r.number("/ess/soc_max_kwh");
    e.soc_init = r.number("/ess/soc_init_kwh");
    e.charge_price = r.number("/ess/charge_price_per_kwh");
    e.discharge_price = r.number("/ess/discharge_price_per_kwh");
    e.reserve_price = r.number("/ess/reserve_price_per_kwh");
    e.q_ch_max = r.number_or("/ess/q_ch_max_kvar", 0.0);
    e.q_dc_max = r.number_or("/ess/q_dc_max_kvar", 0.0);
    e.v_min = r.number_or("/ess/v_min_v", 0.0);
    e.v_max = r.number_or("/ess/v_max_v", 0.0);
  }
  {
    c.dr.ratio = r.number("/demand_response/ratio");
    const bool has_min = r.has("/demand_response/p_cn_min_kw");
    const bool has_max = r.has("/demand_response/p_cn_max_kw");
    r.check(has_min == has_max, "/demand_response", "must give both p_cn_min_kw and p_cn_max_kw or neither");
    if (has_min) {
      c.dr.p_cn_min = r.series("/demand_response/p_cn_min_kw", T);
      c.dr.p_cn_max = r.series("/demand_response/p_cn_max_kw", T);
    }
  }
  {
    c.pricing.tou = r.series("/pricing/tou_per_kwh", T);
    c.pricing.ref_price = r.number("/pricing/ref_price_per_kwh");
    c.pricing.ref_el = r.number("/pricing/ref_el_kw");
    c.pricing.max_iters = r.integer("/pricing/max_iters");
    c.pricing.stability_tol = r.number_or("/pricing/stability_tol_per_kwh", 1e-4);
  }
  c.jaya.population = r.integer("/jaya/population");
  c.jaya.max_iters = r.integer("/jaya/iterations");
  c.jaya.rng_seed = static_cast<std::uint64_t>(r.integer_or("/jaya/seed", 1));
  c.ipm.gap_tolerance = r.number_or("/ipm/gap_tolerance", 1e-5);
  c.ipm.max_iters = r.integer_or("/ipm/max_iters", 200);
  c.ipm.initial_point_margin = r.number_or("/ipm/initial_point_margin", 1.0);

  validate_fields(c, r);
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open scenario file {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string());
}

}  // namespace mgsched
