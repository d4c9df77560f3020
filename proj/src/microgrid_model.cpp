#include "mgsched/microgrid_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "mgsched/error.hpp"

namespace mgsched {
namespace {

constexpr double kRepairEps = 1e-9;
constexpr double kFixedPointTol = 1e-7;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::invalid_argument, what);
}

void require_dims(const Schedule& s, const DispatchContext& ctx) {
  const auto t = static_cast<std::size_t>(ctx.periods());
  const std::size_t tm = t * static_cast<std::size_t>(ctx.unit_count());
  const bool ok = s.periods == ctx.periods() && s.units == ctx.unit_count() &&
                  s.on.size() == tm && s.start.size() == tm && s.p_mt.size() == tm &&
                  s.r_mt.size() == tm && s.p_ch.size() == t && s.p_dc.size() == t &&
                  s.p_res.size() == t && s.p_ls.size() == t && s.soc.size() == t + 1 &&
                  ctx.price.size() == t && ctx.reserve_req.size() == t;
  if (!ok) {
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("schedule is {}x{}, context is {}x{}", s.periods, s.units,
                            ctx.periods(), ctx.unit_count()));
  }
}

// Largest discharge not above `request` that leaves the fleet an output some
// commitment can deliver while its headroom still covers the reserve requirement.
double feasible_discharge(const DispatchContext& ctx, int t, double request) {
  const int m = ctx.unit_count();
  const double demand = std::max(0.0, ctx.demand[t]);
  request = std::clamp(request, 0.0, std::min(ctx.ess.p_dc_max, demand));
  if (m > 16) return request;
  const double g0 = demand - request;
  double best = INFINITY;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    double lo = 0.0;
    double hi = -ctx.reserve_req[t];
    for (int n = 0; n < m; ++n) {
      if (!(mask >> n & 1u)) continue;
      lo += ctx.units[n].p_min;
      hi += ctx.units[n].p_max;
    }
    if (lo <= hi && hi >= g0) best = std::min(best, std::max(lo, g0));
  }
  if (!std::isfinite(best) || best > demand) return request;
  return demand - best;
}

// Highest discharge the fleet can absorb in period t.
double discharge_cap(const DispatchContext& ctx, int t) {
  return feasible_discharge(ctx, t, ctx.ess.p_dc_max);
}

// Commitment satisfying both the minimum-output and capacity bounds, closest to
// the requested one; ties prefer less installed capacity. Empty if none exists.
std::optional<std::vector<std::uint8_t>> nearest_commitment(const DispatchContext& ctx,
                                                            const std::uint8_t* on,
                                                            double gen_need, double cap_need) {
  const int m = ctx.unit_count();
  if (m > 16) return std::nullopt;
  std::optional<std::vector<std::uint8_t>> best;
  int best_dist = 0;
  double best_cap = 0.0;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    double lo = 0.0;
    double cap = 0.0;
    int dist = 0;
    for (int n = 0; n < m; ++n) {
      const bool pick = mask >> n & 1u;
      if (pick) {
        lo += ctx.units[n].p_min;
        cap += ctx.units[n].p_max;
      }
      dist += pick != static_cast<bool>(on[n]);
    }
    if (lo > gen_need + kRepairEps || cap < cap_need - kRepairEps) continue;
    if (!best || dist < best_dist || (dist == best_dist && cap < best_cap)) {
      best.emplace(static_cast<std::size_t>(m));
      for (int n = 0; n < m; ++n) (*best)[n] = mask >> n & 1u;
      best_dist = dist;
      best_cap = cap;
    }
  }
  return best;
}

// Charging draws only on fleet capacity left after demand and reserve.
double charge_cap(const DispatchContext& ctx, int t) {
  double fleet = 0.0;
  for (const MtUnit& u : ctx.units) fleet += u.p_max;
  return std::min(ctx.ess.p_ch_max, std::max(0.0, fleet - ctx.demand[t] - ctx.reserve_req[t]));
}

void recompute_soc(Schedule& s, const EssConfig& ess, double dt) {
  s.soc[0] = ess.soc_init;
  for (int t = 0; t < s.periods; ++t) s.soc[t + 1] = soc_step(s.soc[t], s.p_ch[t], s.p_dc[t], ess, dt);
}

// Moves the end-of-cycle energy back to soc_init, touching the latest periods
// first so that the fewest intermediate states change.
void close_soc_cycle(Schedule& s, const DispatchContext& ctx) {
  const EssConfig& ess = ctx.ess;
  const double dt = ctx.dt;
  const int T = s.periods;
  double gap = s.soc[T] - ess.soc_init;

  for (int t = T - 1; t >= 0 && std::abs(gap) > kRepairEps; --t) {
    if (gap > 0.0) {
      double room = INFINITY;
      for (int k = t + 1; k <= T; ++k) room = std::min(room, s.soc[k] - ess.soc_min);
      const double from_charge = ess.eta_ch * s.p_ch[t] * dt;
      const double from_discharge = (discharge_cap(ctx, t) - s.p_dc[t]) * dt / ess.eta_dc;
      const double delta = std::min({gap, std::max(0.0, room), from_charge + std::max(0.0, from_discharge)});
      if (delta <= 0.0) continue;
      const double e1 = std::min(delta, from_charge);
      s.p_ch[t] = e1 >= from_charge ? 0.0 : s.p_ch[t] - e1 / (ess.eta_ch * dt);
      const double e2 = delta - e1;
      if (e2 > 0.0) s.p_dc[t] += e2 * ess.eta_dc / dt;
      for (int k = t + 1; k <= T; ++k) s.soc[k] -= delta;
      gap -= delta;
    } else {
      double room = INFINITY;
      for (int k = t + 1; k <= T; ++k) room = std::min(room, ess.soc_max - s.soc[k]);
      const double from_discharge = s.p_dc[t] * dt / ess.eta_dc;
      const double from_charge = (charge_cap(ctx, t) - s.p_ch[t]) * ess.eta_ch * dt;
      const double delta = std::min({-gap, std::max(0.0, room), from_discharge + std::max(0.0, from_charge)});
      if (delta <= 0.0) continue;
      const double e1 = std::min(delta, from_discharge);
      s.p_dc[t] = e1 >= from_discharge ? 0.0 : s.p_dc[t] - e1 * ess.eta_dc / dt;
      const double e2 = delta - e1;
      if (e2 > 0.0) s.p_ch[t] += e2 / (ess.eta_ch * dt);
      for (int k = t + 1; k <= T; ++k) s.soc[k] += delta;
      gap += delta;
    }
  }

  recompute_soc(s, ess, dt);
  if (std::abs(s.soc[T] - ess.soc_init) > kRepairEps) {
    std::fill(s.p_ch.begin(), s.p_ch.end(), 0.0);
    std::fill(s.p_dc.begin(), s.p_dc.end(), 0.0);
    recompute_soc(s, ess, dt);
  }
  s.soc[T] = ess.soc_init;
}

}  // namespace

void MtUnit::validate() const {
  require(p_min >= 0.0 && p_min <= p_max, fmt::format("unit {}: need 0 <= p_min <= p_max", name));
  require(fixed_cost >= 0.0 && startup_cost >= 0.0 && fuel_slope >= 0.0 && reserve_cost >= 0.0,
          fmt::format("unit {}: costs must be >= 0", name));
}

void EssConfig::validate() const {
  require(eta_ch > 0.0 && eta_ch <= 1.0 && eta_dc > 0.0 && eta_dc <= 1.0,
          "ess efficiencies must lie in (0, 1]");
  require(soc_min <= soc_init && soc_init <= soc_max, "ess needs soc_min <= soc_init <= soc_max");
  require(p_ch_max >= 0.0 && p_dc_max >= 0.0, "ess power limits must be >= 0");
  require(charge_price >= 0.0 && discharge_price >= 0.0 && reserve_price >= 0.0,
          "ess prices must be >= 0");
}

Schedule::Schedule(int periods_, int units_) : periods(periods_), units(units_) {
  const auto t = static_cast<std::size_t>(periods_);
  const std::size_t tm = t * static_cast<std::size_t>(units_);
  on.assign(tm, 0);
  start.assign(tm, 0);
  p_mt.assign(tm, 0.0);
  r_mt.assign(tm, 0.0);
  p_ch.assign(t, 0.0);
  p_dc.assign(t, 0.0);
  p_res.assign(t, 0.0);
  p_ls.assign(t, 0.0);
  soc.assign(t + 1, 0.0);
}

void DispatchContext::validate() const {
  require(!demand.empty(), "dispatch horizon must be >= 1");
  if (price.size() != demand.size() || reserve_req.size() != demand.size()) {
    throw Error(ErrorKind::dimension_mismatch, "demand, price and reserve arrays differ in length");
  }
  for (const auto& u : units) u.validate();
  ess.validate();
  require(shed_penalty >= 0.0, "shed penalty must be >= 0");
  require(dt > 0.0, "dt must be > 0");
}

CostBreakdown evaluate_cost(const Schedule& s, const DispatchContext& ctx) {
  require_dims(s, ctx);
  const double dt = ctx.dt;
  const EssConfig& ess = ctx.ess;
  CostBreakdown c;
  for (int t = 0; t < s.periods; ++t) {
    c.revenue += ctx.demand[t] * ctx.price[t] * dt;
    c.ess += (ess.discharge_price * s.p_dc[t] - ess.charge_price * s.p_ch[t]) * dt;
    c.ess_reserve += ess.reserve_price * s.p_res[t] * dt;
    c.shedding += ctx.shed_penalty * s.p_ls[t] * dt;
    for (int n = 0; n < s.units; ++n) {
      const std::size_t i = s.at(t, n);
      const MtUnit& u = ctx.units[n];
      c.mt += u.reserve_cost * s.r_mt[i] + u.startup_cost * s.start[i];
      if (s.on[i]) c.mt += u.fixed_cost + u.fuel_slope * s.p_mt[i] * dt;
    }
  }
  return c;
}

double soc_step(double soc, double p_ch, double p_dc, const EssConfig& ess, double dt) {
  if (p_ch > 0.0 && p_dc > 0.0) {
    throw Error(ErrorKind::simultaneity,
                fmt::format("ESS charging ({}) and discharging ({}) at once", p_ch, p_dc));
  }
  if (p_ch > 0.0) return soc + ess.eta_ch * p_ch * dt;
  if (p_dc > 0.0) return soc - dt * p_dc / ess.eta_dc;
  return soc;
}

double ess_reserve_limit(double soc, double p_dc, const EssConfig& ess, double dt) {
  return std::max(0.0, std::min(ess.eta_dc * (soc - ess.soc_min) / dt, ess.p_dc_max - p_dc));
}

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::power_balance: return "power_balance";
    case Constraint::mt_output_limits: return "mt_output_limits";
    case Constraint::soc_dynamics: return "soc_dynamics";
    case Constraint::soc_bounds: return "soc_bounds";
    case Constraint::ess_power_limits: return "ess_power_limits";
    case Constraint::soc_closure: return "soc_closure";
    case Constraint::mt_reserve_headroom: return "mt_reserve_headroom";
    case Constraint::ess_reserve_limit: return "ess_reserve_limit";
    case Constraint::reserve_chance: return "reserve_chance";
    case Constraint::charge_discharge_exclusive: return "charge_discharge_exclusive";
    case Constraint::startup_logic: return "startup_logic";
    case Constraint::nonnegativity: return "nonnegativity";
  }
  return "unknown";
}

std::vector<Violation> check_feasible(const Schedule& s, const DispatchContext& ctx, double tol) {
  require_dims(s, ctx);
  const EssConfig& ess = ctx.ess;
  const double dt = ctx.dt;
  std::vector<Violation> out;
  auto flag = [&](int t, Constraint c, double magnitude) {
    if (magnitude > tol) out.push_back({t, c, magnitude});
  };

  for (int t = 0; t < s.periods; ++t) {
    double generation = 0.0;
    double reserve = 0.0;
    for (int n = 0; n < s.units; ++n) {
      const std::size_t i = s.at(t, n);
      const MtUnit& u = ctx.units[n];
      const double p = s.p_mt[i];
      const double r = s.r_mt[i];
      generation += p;
      reserve += r;
      if (s.on[i]) {
        flag(t, Constraint::mt_output_limits, std::max(u.p_min - p, p - u.p_max));
      } else {
        flag(t, Constraint::mt_output_limits, std::abs(p));
      }
      // Output overshoot is the output-limit violation; headroom only polices r.
      flag(t, Constraint::mt_reserve_headroom, r - std::max(0.0, (s.on[i] ? u.p_max : 0.0) - p));
      flag(t, Constraint::nonnegativity, -r);
      const int prev = t > 0 ? s.on[s.at(t - 1, n)] : 0;
      const int expected_start = std::max(0, static_cast<int>(s.on[i]) - prev);
      flag(t, Constraint::startup_logic, s.start[i] == expected_start ? 0.0 : 1.0);
    }
    const double ch = s.p_ch[t];
    const double dc = s.p_dc[t];
    flag(t, Constraint::power_balance,
         std::abs(generation + dc - ch - (ctx.demand[t] - s.p_ls[t])));
    flag(t, Constraint::nonnegativity, std::max({-ch, -dc, -s.p_res[t], -s.p_ls[t]}));
    flag(t, Constraint::ess_power_limits, std::max(ch - ess.p_ch_max, dc - ess.p_dc_max));
    flag(t, Constraint::charge_discharge_exclusive, std::min(ch, dc));
    const double next = s.soc[t] + ess.eta_ch * std::max(ch, 0.0) * dt - dt * std::max(dc, 0.0) / ess.eta_dc;
    flag(t, Constraint::soc_dynamics, std::abs(s.soc[t + 1] - next));
    flag(t, Constraint::ess_reserve_limit, s.p_res[t] - ess_reserve_limit(s.soc[t], dc, ess, dt));
    flag(t, Constraint::reserve_chance, ctx.reserve_req[t] - (reserve + s.p_res[t]));
  }
  for (int t = 0; t <= s.periods; ++t) {
    flag(t, Constraint::soc_bounds, std::max(ess.soc_min - s.soc[t], s.soc[t] - ess.soc_max));
  }
  // The cycle must start and end exactly at soc_init.
  if (s.soc.front() != ess.soc_init || s.soc.back() != ess.soc_init) {
    out.push_back({-1, Constraint::soc_closure,
                   std::max(std::abs(s.soc.front() - ess.soc_init),
                            std::abs(s.soc.back() - ess.soc_init))});
  }
  return out;
}

void derive_startups(Schedule& s) {
  for (int t = 0; t < s.periods; ++t) {
    for (int n = 0; n < s.units; ++n) {
      const std::size_t i = s.at(t, n);
      const int prev = t > 0 ? s.on[s.at(t - 1, n)] : 0;
      s.start[i] = static_cast<std::uint8_t>(s.on[i] > prev ? 1 : 0);
    }
  }
}

namespace {

// Rebuilds what follows from the decisions: idle units produce nothing, the
// state of charge follows the storage powers, starts follow the commitment and
// shedding closes the balance. False when the decisions are not yet well formed.
bool normalise_derived(Schedule& s, const DispatchContext& ctx) {
  const EssConfig& ess = ctx.ess;
  for (std::uint8_t& v : s.on) v = v ? 1 : 0;
  for (std::size_t i = 0; i < s.on.size(); ++i) {
    if (!s.on[i]) s.p_mt[i] = s.r_mt[i] = 0.0;
  }
  derive_startups(s);
  for (int t = 0; t < s.periods; ++t) {
    if (s.p_ch[t] < 0.0 || s.p_dc[t] < 0.0 || (s.p_ch[t] > 0.0 && s.p_dc[t] > 0.0)) return false;
  }
  recompute_soc(s, ess, ctx.dt);
  if (std::abs(s.soc.back() - ess.soc_init) > kRepairEps) return false;
  s.soc.back() = ess.soc_init;
  for (int t = 0; t < s.periods; ++t) {
    double supply = s.p_dc[t] - s.p_ch[t];
    for (int n = 0; n < s.units; ++n) supply += s.p_mt[s.at(t, n)];
    const double shed = ctx.demand[t] - supply;
    if (std::abs(shed - s.p_ls[t]) > kRepairEps) s.p_ls[t] = shed;
    if (s.p_ls[t] > kRepairEps) {
      // Shedding is only a resting point once the whole fleet is spent.
      double used = 0.0;
      double fleet = 0.0;
      for (int n = 0; n < s.units; ++n) {
        const std::size_t i = s.at(t, n);
        if (!s.on[i]) return false;
        used += s.p_mt[i] + s.r_mt[i];
        fleet += ctx.units[n].p_max;
      }
      if (used < fleet - kRepairEps) return false;
    }
  }
  return true;
}

}  // namespace

RepairOutcome repair(Schedule& s, const DispatchContext& ctx) {
  require_dims(s, ctx);
  const EssConfig& ess = ctx.ess;
  const double dt = ctx.dt;
  const int T = s.periods;
  const int M = s.units;

  // Derived quantities first; a schedule that is then feasible is a fixed point.
  if (normalise_derived(s, ctx) && check_feasible(s, ctx, kFixedPointTol).empty()) return {true};

  // Storage: exclusivity, power boxes, then the state-of-charge window.
  s.soc[0] = ess.soc_init;
  for (int t = 0; t < T; ++t) {
    double ch = std::clamp(s.p_ch[t], 0.0, charge_cap(ctx, t));
    double dc = feasible_discharge(ctx, t, s.p_dc[t]);
    if (dc > ch) ch = 0.0; else dc = 0.0;
    if (ch > 0.0) ch = std::min(ch, std::max(0.0, (ess.soc_max - s.soc[t]) / (ess.eta_ch * dt)));
    if (dc > 0.0) dc = std::min(dc, std::max(0.0, (s.soc[t] - ess.soc_min) * ess.eta_dc / dt));
    s.p_ch[t] = ch;
    s.p_dc[t] = dc;
    s.soc[t + 1] = soc_step(s.soc[t], ch, dc, ess, dt);
  }
  close_soc_cycle(s, ctx);

  std::vector<int> by_capacity(M);
  std::iota(by_capacity.begin(), by_capacity.end(), 0);
  std::stable_sort(by_capacity.begin(), by_capacity.end(),
                   [&](int a, int b) { return ctx.units[a].p_max > ctx.units[b].p_max; });
  std::vector<int> by_reserve_cost(M);
  std::iota(by_reserve_cost.begin(), by_reserve_cost.end(), 0);
  std::stable_sort(by_reserve_cost.begin(), by_reserve_cost.end(), [&](int a, int b) {
    return ctx.units[a].reserve_cost < ctx.units[b].reserve_cost;
  });

  for (int t = 0; t < T; ++t) {
    std::uint8_t* on = &s.on[s.at(t, 0)];
    double* p = &s.p_mt[s.at(t, 0)];
    double* r = &s.r_mt[s.at(t, 0)];
    for (int n = 0; n < M; ++n) on[n] = on[n] ? 1 : 0;

    double gen_need = ctx.demand[t] - s.p_dc[t] + s.p_ch[t];
    const double res_limit = ess_reserve_limit(s.soc[t], s.p_dc[t], ess, dt);
    const double mt_res_need = std::max(0.0, ctx.reserve_req[t] - res_limit);
    double cap_need = gen_need + mt_res_need;

    double cap_on = 0.0;
    double min_on = 0.0;
    for (int n = 0; n < M; ++n) {
      if (on[n]) {
        cap_on += ctx.units[n].p_max;
        min_on += ctx.units[n].p_min;
      }
    }
    // Commit the largest idle units until capacity covers energy plus reserve.
    for (int n : by_capacity) {
      if (cap_on >= cap_need - kRepairEps) break;
      if (!on[n]) {
        on[n] = 1;
        cap_on += ctx.units[n].p_max;
        min_on += ctx.units[n].p_min;
      }
    }
    // Decommit while minimum outputs overshoot, never breaking capacity.
    while (min_on > gen_need + kRepairEps) {
      int drop = -1;
      for (int n = 0; n < M; ++n) {
        if (!on[n] || cap_on - ctx.units[n].p_max < cap_need - kRepairEps) continue;
        if (drop < 0 || ctx.units[n].p_min > ctx.units[drop].p_min) drop = n;
      }
      if (drop < 0) {
        const auto alt = nearest_commitment(ctx, on, gen_need, cap_need);
        if (!alt) return {false};
        cap_on = 0.0;
        min_on = 0.0;
        for (int k = 0; k < M; ++k) {
          on[k] = (*alt)[k];
          if (on[k]) {
            cap_on += ctx.units[k].p_max;
            min_on += ctx.units[k].p_min;
          }
        }
        break;
      }
      on[drop] = 0;
      cap_on -= ctx.units[drop].p_max;
      min_on -= ctx.units[drop].p_min;
    }
    // Shedding is the last resort once every unit is committed.
    double shed = 0.0;
    if (cap_on < cap_need - kRepairEps) {
      shed = std::min(cap_need - cap_on, std::max(0.0, gen_need - min_on));
      gen_need -= shed;
      cap_need -= shed;
      if (cap_on < cap_need - kRepairEps) return {false};
    }
    s.p_ls[t] = shed;

    double imbalance = gen_need;
    for (int n = 0; n < M; ++n) {
      p[n] = on[n] ? std::clamp(p[n], ctx.units[n].p_min, ctx.units[n].p_max) : 0.0;
      imbalance -= p[n];
    }
    for (int n : by_capacity) {
      if (!on[n] || std::abs(imbalance) <= kRepairEps) continue;
      const MtUnit& u = ctx.units[n];
      if (imbalance > 0.0) {
        const double inc = std::min(imbalance, u.p_max - p[n]);
        p[n] += inc;
        imbalance -= inc;
      } else {
        const double dec = std::min(-imbalance, p[n] - u.p_min);
        p[n] -= dec;
        imbalance += dec;
      }
    }
    if (std::abs(imbalance) > kRepairEps) return {false};

    // Reserve offers: clamp to headroom, then top up the cheapest sources.
    double reserve = 0.0;
    for (int n = 0; n < M; ++n) {
      r[n] = on[n] ? std::clamp(r[n], 0.0, std::max(0.0, ctx.units[n].p_max - p[n])) : 0.0;
      reserve += r[n];
    }
    double& p_res = s.p_res[t];
    p_res = std::clamp(p_res, 0.0, res_limit);
    reserve += p_res;
    double shortfall = ctx.reserve_req[t] - reserve;
    if (shortfall > kRepairEps) {
      bool ess_first = true;
      for (int n = 0; n < M; ++n) {
        if (on[n] && ctx.units[n].reserve_cost < ess.reserve_price) ess_first = false;
      }
      auto top_up_ess = [&] {
        const double add = std::min(shortfall, res_limit - p_res);
        if (add > 0.0) {
          p_res += add;
          shortfall -= add;
        }
      };
      if (ess_first) top_up_ess();
      for (int n : by_reserve_cost) {
        if (shortfall <= 0.0) break;
        if (!on[n]) continue;
        const double add = std::min(shortfall, std::max(0.0, ctx.units[n].p_max - p[n] - r[n]));
        if (add > 0.0) {
          r[n] += add;
          shortfall -= add;
        }
      }
      if (!ess_first) top_up_ess();
      if (shortfall > kRepairEps) return {false};
    }
  }
  derive_startups(s);
  return {true};
}

}  // namespace mgsched
