#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dummyloc/grid_model.hpp"

namespace dummyloc {

struct GeneratorContext {
  GeneratorContext(const HistoryModel& h, std::uint64_t seed) : history(h), rng_seed(seed) {}

  const HistoryModel& h() const { return history.get(); }

  std::reference_wrapper<const HistoryModel> history;
  std::uint64_t rng_seed = 0;
  std::size_t pool_multiplier = 4;
  std::size_t exhaustive_subset_cap = 1000;  // m
};

/// Weights over the previous set and over the candidate next set.
struct WeightTable {
  PosteriorVector prev_weights;
  PosteriorVector next_weights;
};

struct RdgResult {
  LocationSet set;
  /// prev_weights is the carried-in posterior; next_weights the normalized
  /// max-product weights of `set`, aligned with its cells.
  WeightTable weights;
};

/// Scores closer than this are ties; ties go to the lower cell index (or the
/// first-found subset for the exhaustive search).
inline constexpr double kScoreTieTolerance = 1e-12;

/// Every generator returns its cells in ascending index order with
/// real_index pointing at `real`.

LocationSet random_gen(const GeneratorContext& ctx, CellId real, std::size_t k);

/// Baseline matching dummies to the real cell's query probability: the 2k
/// nearest cells by |b - b_real| are candidates, and k-1 of them are picked
/// greedily to maximize normalized cell-entropy.
LocationSet dls_gen(const GeneratorContext& ctx, CellId real, std::size_t k);

/// pool_multiplier * k cells other than `real`, ranked by |b - b_real|
/// ascending with ties broken by cell index.
std::vector<CellId> dummy_pool(const GeneratorContext& ctx, CellId real, std::size_t k);

/// Best of m sampled (k-1)-subsets of the pool by pairwise transition-entropy
/// w.r.t. `prev`, where m = min(C(|pool|, k-1), exhaustive_subset_cap).
LocationSet exhaustive_gen(const GeneratorContext& ctx, const LocationSet& prev, CellId real,
                           std::size_t k);

/// Adds pool members one at a time, each maximizing the transition-entropy of
/// the partial set w.r.t. `prev`.
LocationSet greedy_gen(const GeneratorContext& ctx, const LocationSet& prev, CellId real,
                       std::size_t k);

/// Robust dummy generation: greedy over the pool, scoring each candidate by
/// the entropy of the normalized max-product weights of the partial set.
RdgResult rdg_gen(const GeneratorContext& ctx, const LocationSet& prev,
                  std::span<const double> prev_posterior, CellId real, std::size_t k);

/// weight(u) = max over u' in prev of prev_weights[u'] * Pr(u' -> u), then
/// normalized over `next`.
PosteriorVector max_product_weights(const HistoryModel& h, const LocationSet& prev,
                                    std::span<const double> prev_weights, const LocationSet& next);

}  // namespace dummyloc
