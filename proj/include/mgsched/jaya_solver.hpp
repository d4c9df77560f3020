#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "mgsched/microgrid_model.hpp"

namespace mgsched {

struct JayaParams {
  int population = 100;
  int max_iters = 1500;
  std::uint64_t rng_seed = 1;
  /// Worker threads for fitness evaluation; results do not depend on it.
  int workers = 1;

  void validate() const;
};

struct GeneBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
};

struct Candidate {
  std::vector<double> genes;
  double fitness = INFINITY;
};

/// x'_j = x_j + r1_j (best_j - |x_j|) - r2_j (worst_j - |x_j|), clamped to bounds.
std::vector<double> jaya_move(std::span<const double> x, std::span<const double> best,
                              std::span<const double> worst, std::span<const double> r1,
                              std::span<const double> r2, const GeneBounds& bounds);

/// Same move with fresh U(0,1) draws per gene.
std::vector<double> jaya_update(const Candidate& x, const Candidate& best, const Candidate& worst,
                                const GeneBounds& bounds, std::mt19937_64& rng);

struct TracePoint {
  int iteration;  // 1-based
  double best_fitness;
  double feasible_fraction;
};

struct JayaResult {
  Candidate best;
  std::vector<TracePoint> trace;
  std::size_t evaluations = 0;
};

/// Returns the fitness of a gene vector, or +inf when it cannot be evaluated.
/// It may project the genes in place onto the point it actually scored.
/// `worker` identifies the calling thread so callers can keep scratch space.
using Objective = std::function<double(std::span<double> genes, int worker)>;

/// Iteration 1 evaluates a uniform random population; each later iteration
/// moves every candidate once with greedy acceptance. Each candidate draws
/// from its own seed-derived stream, so any worker count gives the same run.
JayaResult jaya_minimize(const Objective& objective, const GeneBounds& bounds,
                         const JayaParams& params);

// Upper-level coding: per period, {U_n, P_n, R_n} for every unit then
// {P_ch, P_dc, P_res}. Commitment genes are relaxed to [0, 1] and decoded
// with a 0.5 threshold.
int genes_per_period(int units);
GeneBounds upper_gene_bounds(const DispatchContext& ctx);
void decode_schedule(std::span<const double> genes, const DispatchContext& ctx, Schedule& out);
/// Writes a repaired schedule back into its genes. Commitment genes are only
/// touched when repair flipped the unit, and output/reserve genes of units
/// that stay off keep their values.
void encode_repaired(const Schedule& s, const DispatchContext& ctx, std::span<double> genes);

struct UpperResult {
  Schedule schedule;
  CostBreakdown cost;
  std::vector<TracePoint> trace;
  std::size_t evaluations = 0;
};

/// Throws Error(no_feasible_candidate) when nothing in the run was repairable.
UpperResult solve_upper(const DispatchContext& ctx, const JayaParams& params);

}  // namespace mgsched
