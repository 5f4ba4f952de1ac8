#include "dummyloc/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "dummyloc/error.hpp"
#include "dummyloc/metrics.hpp"
#include "set_scorer.hpp"

namespace dummyloc {
namespace {

void check_k(const HistoryModel& h, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (k > h.grid().cell_count()) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(k) + " exceeds the " +
                                           std::to_string(h.grid().cell_count()) + " grid cells");
  }
}

void check_history(const HistoryModel& h) {
  if (h.total_queries() == 0) throw Error(ErrorCode::kEmptyHistory, "history holds no queries");
}

LocationSet make_set(CellId real, std::vector<CellId> dummies) {
  dummies.push_back(real);
  std::sort(dummies.begin(), dummies.end());
  const auto pos = std::lower_bound(dummies.begin(), dummies.end(), real) - dummies.begin();
  return LocationSet(std::move(dummies), static_cast<std::size_t>(pos));
}

std::uint64_t count_distance(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

/// The `count` cells nearest to real by query count, ties by index.
std::vector<CellId> nearest_by_popularity(const HistoryModel& h, CellId real, std::size_t count) {
  const auto counts = h.query_counts();
  const auto target = h.query_count(real);
  std::vector<CellId> cells;
  cells.reserve(counts.size() - 1);
  for (std::uint32_t c = 0; c < counts.size(); ++c) {
    if (c != real.index) cells.push_back(CellId{c});
  }
  const auto closer = [&](CellId a, CellId b) {
    const auto da = count_distance(counts[a.index], target);
    const auto db = count_distance(counts[b.index], target);
    return da != db ? da < db : a < b;
  };
  count = std::min(count, cells.size());
  std::nth_element(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(count), cells.end(),
                   closer);
  cells.resize(count);
  std::sort(cells.begin(), cells.end(), closer);
  return cells;
}

double xlog2x(double v) { return v > 0.0 ? v * std::log2(v) : 0.0; }

/// Picks `slots` members of `candidates` one by one, each time taking the
/// candidate whose addition maximizes `score(chosen indices + candidate)`.
template <typename Score>
std::vector<std::uint32_t> greedy_select(std::span<const CellId> candidates, std::size_t slots,
                                         std::vector<std::uint32_t> chosen, Score&& score) {
  std::vector<bool> used(candidates.size(), false);
  for (auto c : chosen) used[c] = true;
  for (std::size_t step = 0; step < slots; ++step) {
    std::int64_t best = -1;
    double best_score = 0.0;
    chosen.push_back(0);
    for (std::uint32_t d = 0; d < candidates.size(); ++d) {
      if (used[d]) continue;
      chosen.back() = d;
      const double s = score(std::span<const std::uint32_t>(chosen));
      if (best < 0 || s > best_score + kScoreTieTolerance) {
        best = d;
        best_score = s;
      } else if (s >= best_score - kScoreTieTolerance && candidates[d] < candidates[best]) {
        best = d;
        best_score = std::max(best_score, s);
      }
    }
    chosen.back() = static_cast<std::uint32_t>(best);
    used[static_cast<std::size_t>(best)] = true;
  }
  return chosen;
}

/// Pool with the real cell appended as the last candidate.
std::vector<CellId> pool_with_real(const GeneratorContext& ctx, CellId real, std::size_t k) {
  auto candidates = dummy_pool(ctx, real, k);
  candidates.push_back(real);
  return candidates;
}

LocationSet set_from_members(std::span<const CellId> candidates,
                             std::span<const std::uint32_t> members, CellId real) {
  std::vector<CellId> dummies;
  for (auto m : members) {
    if (candidates[m] != real) dummies.push_back(candidates[m]);
  }
  return make_set(real, std::move(dummies));
}

// Saturating binomial coefficient.
std::uint64_t choose(std::uint64_t n, std::uint64_t r, std::uint64_t cap) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  long double acc = 1.0L;
  for (std::uint64_t i = 1; i <= r; ++i) {
    acc = acc * static_cast<long double>(n - r + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(acc));
}

}  // namespace

LocationSet random_gen(const GeneratorContext& ctx, CellId real, std::size_t k) {
  const auto& h = ctx.h();
  check_k(h, k);
  if (!h.grid().contains(real)) throw Error(ErrorCode::kCellOutOfGrid, "real cell outside grid");
  std::mt19937_64 rng(ctx.rng_seed);
  std::vector<CellId> others;
  others.reserve(h.grid().cell_count() - 1);
  for (std::uint32_t c = 0; c < h.grid().cell_count(); ++c) {
    if (c != real.index) others.push_back(CellId{c});
  }
  // Partial Fisher-Yates: the first k-1 slots become a uniform sample.
  for (std::size_t i = 0; i + 1 < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
    std::swap(others[i], others[pick(rng)]);
  }
  others.resize(k - 1);
  return make_set(real, std::move(others));
}

std::vector<CellId> dummy_pool(const GeneratorContext& ctx, CellId real, std::size_t k) {
  const auto& h = ctx.h();
  if (ctx.pool_multiplier < 1) throw Error(ErrorCode::kInvalidArgument, "pool_multiplier must be >= 1");
  const auto size = ctx.pool_multiplier * k;
  if (size >= h.grid().cell_count()) {
    throw Error(ErrorCode::kPoolTooLarge, "pool of " + std::to_string(size) + " needs more than " +
                                              std::to_string(h.grid().cell_count()) + " cells");
  }
  return nearest_by_popularity(h, real, size);
}

LocationSet dls_gen(const GeneratorContext& ctx, CellId real, std::size_t k) {
  const auto& h = ctx.h();
  check_k(h, k);
  check_history(h);
  const auto candidates = nearest_by_popularity(h, real, 2 * k);

  // Entropy of counts n_i with total S: log2 S - (sum n_i log2 n_i) / S.
  const auto n = [&](CellId c) { return static_cast<double>(h.query_count(c)); };
  double total = n(real);
  double plogp = xlog2x(total);
  std::vector<CellId> chosen;
  std::vector<bool> used(candidates.size(), false);
  for (std::size_t step = 0; step + 1 < k; ++step) {
    std::size_t best = candidates.size();
    double best_score = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      const double s_total = total + n(candidates[i]);
      const double score =
          s_total > 0.0 ? std::log2(s_total) - (plogp + xlog2x(n(candidates[i]))) / s_total : 0.0;
      if (best == candidates.size() || score > best_score + kScoreTieTolerance) {
        best = i;
        best_score = score;
      } else if (score >= best_score - kScoreTieTolerance && candidates[i] < candidates[best]) {
        best = i;
        best_score = std::max(best_score, score);
      }
    }
    used[best] = true;
    chosen.push_back(candidates[best]);
    total += n(candidates[best]);
    plogp += xlog2x(n(candidates[best]));
  }
  return make_set(real, std::move(chosen));
}

LocationSet exhaustive_gen(const GeneratorContext& ctx, const LocationSet& prev, CellId real,
                           std::size_t k) {
  const auto& h = ctx.h();
  check_k(h, k);
  check_history(h);
  if (ctx.exhaustive_subset_cap < 1) {
    throw Error(ErrorCode::kInvalidArgument, "exhaustive_subset_cap must be >= 1");
  }
  const auto candidates = pool_with_real(ctx, real, k);
  const auto pool_size = candidates.size() - 1;
  const auto real_slot = static_cast<std::uint32_t>(pool_size);
  const std::size_t r = k - 1;
  if (r == 0) return make_set(real, {});

  const auto total = choose(pool_size, r, ctx.exhaustive_subset_cap);
  std::vector<std::vector<std::uint32_t>> subsets;
  if (total <= ctx.exhaustive_subset_cap) {
    // Every subset, in lexicographic order of pool positions.
    std::vector<std::uint32_t> idx(r);
    std::iota(idx.begin(), idx.end(), 0u);
    while (true) {
      subsets.push_back(idx);
      std::size_t i = r;
      while (i > 0 && idx[i - 1] == pool_size - r + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
  } else {
    std::mt19937_64 rng(ctx.rng_seed);
    std::set<std::vector<std::uint32_t>> seen;
    std::vector<std::uint32_t> order(pool_size);
    while (subsets.size() < ctx.exhaustive_subset_cap) {
      std::iota(order.begin(), order.end(), 0u);
      for (std::size_t i = 0; i < r; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool_size - 1);
        std::swap(order[i], order[pick(rng)]);
      }
      std::vector<std::uint32_t> subset(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r));
      std::sort(subset.begin(), subset.end());
      if (seen.insert(subset).second) subsets.push_back(std::move(subset));
    }
  }

  detail::SetScorer scorer(h, prev, normalized_priors(h, prev), candidates);
  std::vector<std::uint32_t> members(r + 1);
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    members[0] = real_slot;
    std::copy(subsets[s].begin(), subsets[s].end(), members.begin() + 1);
    const double score = scorer.transition_entropy(members);
    if (score > best_score + kScoreTieTolerance) {
      best_score = score;
      best = s;
    }
  }
  members[0] = real_slot;
  std::copy(subsets[best].begin(), subsets[best].end(), members.begin() + 1);
  return set_from_members(candidates, members, real);
}

LocationSet greedy_gen(const GeneratorContext& ctx, const LocationSet& prev, CellId real,
                       std::size_t k) {
  const auto& h = ctx.h();
  check_k(h, k);
  check_history(h);
  const auto candidates = pool_with_real(ctx, real, k);
  detail::SetScorer scorer(h, prev, normalized_priors(h, prev), candidates);
  const auto real_slot = static_cast<std::uint32_t>(candidates.size() - 1);
  const auto members =
      greedy_select(candidates, k - 1, {real_slot},
                    [&](std::span<const std::uint32_t> m) { return scorer.transition_entropy(m); });
  return set_from_members(candidates, members, real);
}

RdgResult rdg_gen(const GeneratorContext& ctx, const LocationSet& prev,
                  std::span<const double> prev_posterior, CellId real, std::size_t k) {
  const auto& h = ctx.h();
  check_k(h, k);
  check_history(h);
  const auto candidates = pool_with_real(ctx, real, k);
  detail::SetScorer scorer(h, prev, prev_posterior, candidates);
  const auto real_slot = static_cast<std::uint32_t>(candidates.size() - 1);
  const auto members =
      greedy_select(candidates, k - 1, {real_slot},
                    [&](std::span<const std::uint32_t> m) { return scorer.max_weight_entropy(m); });
  auto set = set_from_members(candidates, members, real);
  auto weights = max_product_weights(h, prev, prev_posterior, set);
  return RdgResult{std::move(set),
                   WeightTable{PosteriorVector(prev_posterior.begin(), prev_posterior.end()),
                               std::move(weights)}};
}

PosteriorVector max_product_weights(const HistoryModel& h, const LocationSet& prev,
                                    std::span<const double> prev_weights, const LocationSet& next) {
  if (prev_weights.size() != prev.k()) {
    throw Error(ErrorCode::kLengthMismatch, "weights not aligned with the previous set");
  }
  const auto rows = transition_matrix(h, prev, next);
  PosteriorVector out(next.k(), 0.0);
  double mass = 0.0;
  for (std::size_t x = 0; x < prev.k(); ++x) {
    mass += prev_weights[x];
    for (std::size_t y = 0; y < next.k(); ++y) out[y] = std::max(out[y], prev_weights[x] * rows[x][y]);
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::kAllZeroPriors, "previous weights carry no mass");
  double total = 0.0;
  for (double v : out) total += v;
  if (!(total > 0.0)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(next.k()));
    return out;
  }
  for (auto& v : out) v /= total;
  return out;
}

}  // namespace dummyloc
