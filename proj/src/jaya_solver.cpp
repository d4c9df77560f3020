#include "mgsched/jaya_solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include <fmt/format.h>

#include "mgsched/error.hpp"

namespace mgsched {
namespace {

std::mt19937_64 candidate_stream(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x6a617961u};
  return std::mt19937_64(seq);
}

template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::clamp(workers, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::vector<std::future<void>> jobs;
  jobs.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int i = w; i < count; i += workers) fn(i, w);
    }));
  }
  for (auto& j : jobs) j.get();
}

}  // namespace

void JayaParams::validate() const {
  if (population < 2) throw Error(ErrorKind::invalid_argument, "jaya population must be >= 2");
  if (max_iters < 1) throw Error(ErrorKind::invalid_argument, "jaya max_iters must be >= 1");
  if (workers < 1) throw Error(ErrorKind::invalid_argument, "jaya workers must be >= 1");
}

std::vector<double> jaya_move(std::span<const double> x, std::span<const double> best,
                              std::span<const double> worst, std::span<const double> r1,
                              std::span<const double> r2, const GeneBounds& bounds) {
  const std::size_t n = x.size();
  if (best.size() != n || worst.size() != n || r1.size() != n || r2.size() != n ||
      bounds.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "jaya move: gene dimensions differ");
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ax = std::abs(x[j]);
    const double v = x[j] + r1[j] * (best[j] - ax) - r2[j] * (worst[j] - ax);
    out[j] = std::clamp(v, bounds.lower[j], bounds.upper[j]);
  }
  return out;
}

std::vector<double> jaya_update(const Candidate& x, const Candidate& best, const Candidate& worst,
                                const GeneBounds& bounds, std::mt19937_64& rng) {
  const std::size_t n = x.genes.size();
  if (best.genes.size() != n || worst.genes.size() != n || bounds.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "jaya update: gene dimensions differ");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r1 = unit(rng);
    const double r2 = unit(rng);
    const double ax = std::abs(x.genes[j]);
    const double v = x.genes[j] + r1 * (best.genes[j] - ax) - r2 * (worst.genes[j] - ax);
    out[j] = std::clamp(v, bounds.lower[j], bounds.upper[j]);
  }
  return out;
}

JayaResult jaya_minimize(const Objective& objective, const GeneBounds& bounds,
                         const JayaParams& params) {
  params.validate();
  const int pop = params.population;
  const std::size_t dim = bounds.size();

  std::vector<std::mt19937_64> streams;
  streams.reserve(static_cast<std::size_t>(pop));
  for (int k = 0; k < pop; ++k) streams.push_back(candidate_stream(params.rng_seed, k));

  std::vector<Candidate> population(static_cast<std::size_t>(pop));
  JayaResult result;
  result.trace.reserve(static_cast<std::size_t>(params.max_iters));

  auto record = [&](int iteration) {
    int best = 0;
    int feasible = 0;
    for (int k = 0; k < pop; ++k) {
      if (population[k].fitness < population[best].fitness) best = k;
      if (std::isfinite(population[k].fitness)) ++feasible;
    }
    if (population[best].fitness < result.best.fitness || result.best.genes.empty()) {
      result.best = population[best];
    }
    result.trace.push_back({iteration, result.best.fitness,
                            static_cast<double>(feasible) / static_cast<double>(pop)});
  };

  parallel_for(pop, params.workers, [&](int k, int worker) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Candidate& c = population[k];
    c.genes.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      c.genes[j] = bounds.lower[j] + unit(streams[k]) * (bounds.upper[j] - bounds.lower[j]);
    }
    c.fitness = objective(c.genes, worker);
  });
  result.evaluations += static_cast<std::size_t>(pop);
  record(1);

  for (int iter = 2; iter <= params.max_iters; ++iter) {
    int best = 0;
    int worst = 0;
    for (int k = 1; k < pop; ++k) {
      if (population[k].fitness < population[best].fitness) best = k;
      if (population[k].fitness > population[worst].fitness) worst = k;
    }
    // Every move in this iteration sees the same best/worst snapshot.
    const Candidate best_snapshot = population[best];
    const Candidate worst_snapshot = population[worst];
    parallel_for(pop, params.workers, [&](int k, int worker) {
      Candidate& c = population[k];
      std::vector<double> moved = jaya_update(c, best_snapshot, worst_snapshot, bounds, streams[k]);
      const double f = objective(moved, worker);
      if (f < c.fitness) {
        c.genes = std::move(moved);
        c.fitness = f;
      }
    });
    result.evaluations += static_cast<std::size_t>(pop);
    record(iter);
  }
  return result;
}

int genes_per_period(int units) { return 3 * units + 3; }

GeneBounds upper_gene_bounds(const DispatchContext& ctx) {
  const int T = ctx.periods();
  const int M = ctx.unit_count();
  const int g = genes_per_period(M);
  GeneBounds b;
  b.lower.assign(static_cast<std::size_t>(T * g), 0.0);
  b.upper.assign(static_cast<std::size_t>(T * g), 0.0);
  for (int t = 0; t < T; ++t) {
    double* hi = &b.upper[static_cast<std::size_t>(t * g)];
    for (int n = 0; n < M; ++n) {
      hi[n] = 1.0;
      hi[M + n] = ctx.units[n].p_max;
      hi[2 * M + n] = ctx.units[n].p_max;
    }
    hi[3 * M] = ctx.ess.p_ch_max;
    hi[3 * M + 1] = ctx.ess.p_dc_max;
    hi[3 * M + 2] = ctx.ess.p_dc_max;
  }
  return b;
}

void decode_schedule(std::span<const double> genes, const DispatchContext& ctx, Schedule& out) {
  const int T = ctx.periods();
  const int M = ctx.unit_count();
  const int g = genes_per_period(M);
  if (genes.size() != static_cast<std::size_t>(T * g)) {
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("expected {} genes, got {}", T * g, genes.size()));
  }
  if (out.periods != T || out.units != M) out = Schedule(T, M);
  for (int t = 0; t < T; ++t) {
    const double* x = &genes[static_cast<std::size_t>(t * g)];
    for (int n = 0; n < M; ++n) {
      const std::size_t i = out.at(t, n);
      out.on[i] = x[n] >= 0.5 ? 1 : 0;
      out.p_mt[i] = x[M + n];
      out.r_mt[i] = x[2 * M + n];
    }
    out.p_ch[t] = x[3 * M];
    out.p_dc[t] = x[3 * M + 1];
    out.p_res[t] = x[3 * M + 2];
    out.p_ls[t] = 0.0;
  }
}

void encode_repaired(const Schedule& s, const DispatchContext& ctx, std::span<double> genes) {
  const int M = ctx.unit_count();
  const int g = genes_per_period(M);
  for (int t = 0; t < s.periods; ++t) {
    double* x = &genes[static_cast<std::size_t>(t * g)];
    for (int n = 0; n < M; ++n) {
      const std::size_t i = s.at(t, n);
      const bool was_on = x[n] >= 0.5;
      if (s.on[i] != was_on) x[n] = s.on[i] ? 1.0 : 0.0;
      if (s.on[i]) {
        x[M + n] = s.p_mt[i];
        x[2 * M + n] = s.r_mt[i];
      }
    }
    x[3 * M] = s.p_ch[t];
    x[3 * M + 1] = s.p_dc[t];
    x[3 * M + 2] = s.p_res[t];
  }
}

UpperResult solve_upper(const DispatchContext& ctx, const JayaParams& params) {
  ctx.validate();
  params.validate();
  std::vector<Schedule> scratch(static_cast<std::size_t>(params.workers),
                                Schedule(ctx.periods(), ctx.unit_count()));
  const Objective objective = [&](std::span<double> genes, int worker) {
    Schedule& s = scratch[static_cast<std::size_t>(worker)];
    decode_schedule(genes, ctx, s);
    if (!repair(s, ctx).repaired) return static_cast<double>(INFINITY);
    // Lamarckian repair: the population carries the schedules it is scored on.
    encode_repaired(s, ctx, genes);
    return evaluate_cost(s, ctx).total();
  };
  JayaResult run = jaya_minimize(objective, upper_gene_bounds(ctx), params);
  if (!std::isfinite(run.best.fitness)) {
    throw Error(ErrorKind::no_feasible_candidate,
                "no candidate could be repaired into a feasible schedule; the scenario is over-constrained");
  }
  UpperResult out;
  decode_schedule(run.best.genes, ctx, out.schedule);
  repair(out.schedule, ctx);
  out.cost = evaluate_cost(out.schedule, ctx);
  out.trace = std::move(run.trace);
  out.evaluations = run.evaluations;
  return out;
}

}  // namespace mgsched
