#include "set_scorer.hpp"

#include <algorithm>

#include "dummyloc/error.hpp"
#include "dummyloc/metrics.hpp"

namespace dummyloc::detail {

SetScorer::SetScorer(const HistoryModel& h, const LocationSet& prev,
                     std::span<const double> prev_weights, std::span<const CellId> candidates)
    : prior_(prev_weights.begin(), prev_weights.end()),
      alpha_(h.smoothing()),
      drop_silent_(h.zero_row_policy() == ZeroRowPolicy::kNoEvidence),
      incoming_(candidates.size()),
      row_sum_(prev.k()),
      denom_(prev.k()),
      floor_(prev.k()) {
  if (prior_.size() != prev.k()) {
    throw Error(ErrorCode::kLengthMismatch, "weights not aligned with the previous set");
  }
  for (double p : prior_) mass_ += p;
  if (!(mass_ > 0.0)) throw Error(ErrorCode::kAllZeroPriors, "previous weights carry no mass");
  for (std::size_t u = 0; u < candidates.size(); ++u) {
    for (std::uint32_t x = 0; x < prev.k(); ++x) {
      if (prior_[x] == 0.0) continue;
      const auto n = h.transition_count(prev[x], candidates[u]);
      if (n > 0) incoming_[u].push_back(InEdge{x, static_cast<double>(n)});
    }
  }
}

void SetScorer::prepare(std::span<const std::uint32_t> members) {
  std::fill(row_sum_.begin(), row_sum_.end(), 0.0);
  for (auto u : members) {
    for (const auto& e : incoming_[u]) row_sum_[e.from] += e.count;
  }
  const double k = static_cast<double>(members.size());
  // Mirrors transition_matrix: silent rows drop out unless every row is silent.
  // Zero-prior rows never enter incoming_, so "every row" is judged over the
  // rows with mass; a row without mass contributes nothing either way.
  bool any_evidence = false;
  for (double r : row_sum_) any_evidence = any_evidence || r > 0.0;
  const bool drop = drop_silent_ && any_evidence;
  for (std::size_t x = 0; x < prior_.size(); ++x) {
    if (alpha_ == 0.0) {
      denom_[x] = row_sum_[x];
      floor_[x] = (row_sum_[x] == 0.0 && !drop) ? prior_[x] / k : 0.0;
    } else {
      denom_[x] = row_sum_[x] + alpha_ * k;
      floor_[x] = prior_[x] * alpha_ / denom_[x];
    }
  }
  out_.assign(members.size(), 0.0);
}

void SetScorer::normalize() {
  double total = 0.0;
  for (double v : out_) total += v;
  if (!(total > 0.0)) {
    std::fill(out_.begin(), out_.end(), 1.0 / static_cast<double>(out_.size()));
    return;
  }
  for (auto& v : out_) v /= total;
}

std::span<const double> SetScorer::posterior(std::span<const std::uint32_t> members) {
  prepare(members);
  double base = 0.0;
  for (double f : floor_) base += f;
  for (std::size_t i = 0; i < members.size(); ++i) {
    double p = base;
    for (const auto& e : incoming_[members[i]]) p += prior_[e.from] * e.count / denom_[e.from];
    out_[i] = p;
  }
  normalize();
  return out_;
}

std::span<const double> SetScorer::max_weights(std::span<const std::uint32_t> members) {
  prepare(members);
  const double base = *std::max_element(floor_.begin(), floor_.end());
  for (std::size_t i = 0; i < members.size(); ++i) {
    double w = base;
    for (const auto& e : incoming_[members[i]]) {
      w = std::max(w, prior_[e.from] * (e.count + alpha_) / denom_[e.from]);
    }
    out_[i] = w;
  }
  normalize();
  return out_;
}

double SetScorer::transition_entropy(std::span<const std::uint32_t> members) {
  return entropy(posterior(members));
}

double SetScorer::max_weight_entropy(std::span<const std::uint32_t> members) {
  return entropy(max_weights(members));
}

}  // namespace dummyloc::detail
