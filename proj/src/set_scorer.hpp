#pragma once

// Sparse scoring of candidate next sets against a fixed previous set. The
// generators evaluate thousands of candidate sets per call; this keeps each
// evaluation proportional to the number of nonzero transitions touching the
// set instead of k_prev * k_next table lookups.

#include <cstdint>
#include <span>
#include <vector>

#include "dummyloc/grid_model.hpp"

namespace dummyloc::detail {

class SetScorer {
 public:
  SetScorer(const HistoryModel& h, const LocationSet& prev, std::span<const double> prev_weights,
            std::span<const CellId> candidates);

  /// Normalized sum-product posterior (transition-entropy route) of the set
  /// formed by candidates[members[i]].
  std::span<const double> posterior(std::span<const std::uint32_t> members);
  /// Normalized max-product weights (RDG route).
  std::span<const double> max_weights(std::span<const std::uint32_t> members);

  double transition_entropy(std::span<const std::uint32_t> members);
  double max_weight_entropy(std::span<const std::uint32_t> members);

 private:
  struct InEdge {
    std::uint32_t from;  // index into prev
    double count;
  };

  void prepare(std::span<const std::uint32_t> members);
  void normalize();

  std::vector<double> prior_;
  double alpha_ = 0.0;
  bool drop_silent_ = false;  // ZeroRowPolicy::kNoEvidence
  double mass_ = 0.0;
  std::vector<std::vector<InEdge>> incoming_;  // per candidate

  std::vector<double> row_sum_;
  std::vector<double> denom_;
  std::vector<double> floor_;  // per-source mass on a transition with zero count
  std::vector<double> out_;
};

}  // namespace dummyloc::detail
