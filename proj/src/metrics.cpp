#include "dummyloc/metrics.hpp"

#include <cmath>

#include "dummyloc/error.hpp"

namespace dummyloc {

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  // Rounding can push a certain outcome to -0 or a hair below zero.
  return h > 0.0 ? h : 0.0;
}

double cell_entropy(const HistoryModel& h, const LocationSet& ls) {
  PosteriorVector b;
  b.reserve(ls.k());
  for (CellId c : ls.cells()) b.push_back(query_probability(h, c));
  return entropy(b);
}

double normalized_cell_entropy(const HistoryModel& h, const LocationSet& ls) {
  if (h.total_queries() == 0) throw Error(ErrorCode::kEmptyHistory, "history holds no queries");
  return entropy(normalized_priors(h, ls));
}

PosteriorVector posterior_pair(const HistoryModel& h, const LocationSet& prev,
                               std::span<const double> prev_priors, const LocationSet& next) {
  if (prev_priors.size() != prev.k()) {
    throw Error(ErrorCode::kLengthMismatch, "priors not aligned with the previous set");
  }
  const auto rows = transition_matrix(h, prev, next);
  PosteriorVector out(next.k(), 0.0);
  double mass = 0.0;
  for (std::size_t x = 0; x < prev.k(); ++x) {
    mass += prev_priors[x];
    if (prev_priors[x] == 0.0) continue;
    for (std::size_t y = 0; y < next.k(); ++y) out[y] += rows[x][y] * prev_priors[x];
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::kAllZeroPriors, "previous priors carry no mass");
  double total = 0.0;
  for (double v : out) total += v;
  if (!(total > 0.0)) {
    // Only zero-prior cells have evidence: nothing distinguishes the next cells.
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(next.k()));
    return out;
  }
  for (auto& v : out) v /= total;
  return out;
}

double transition_entropy_pair(const HistoryModel& h, const LocationSet& prev,
                               const LocationSet& next) {
  return entropy(posterior_pair(h, prev, normalized_priors(h, prev), next));
}

PosteriorVector posterior_trajectory(const HistoryModel& h, std::span<const LocationSet> steps) {
  if (steps.empty()) throw Error(ErrorCode::kInvalidArgument, "trajectory needs at least one step");
  auto posterior = normalized_priors(h, steps.front());
  for (std::size_t i = 1; i < steps.size(); ++i) {
    posterior = posterior_pair(h, steps[i - 1], posterior, steps[i]);
  }
  return posterior;
}

double transition_entropy_trajectory(const HistoryModel& h, std::span<const LocationSet> steps) {
  return entropy(posterior_trajectory(h, steps));
}

}  // namespace dummyloc
