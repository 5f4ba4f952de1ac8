#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dummyloc/grid_model.hpp"

namespace dummyloc {

struct AttackResult {
  std::vector<CellId> estimated;  // one cell per step, drawn from that step's set
  double path_score = 0.0;        // prior * product of transitions along the path
  double log_path_score = 0.0;    // natural log of path_score
  std::size_t protected_steps = 0;
};

struct ViterbiOptions {
  /// Accumulate log-probabilities; needed for long trajectories where the
  /// plain product underflows.
  bool log_space = false;
};

/// Most likely real-location sequence given the submitted sets. The attack
/// only reads cells and the history, never LocationSet::real_index.
/// Ties go to the lowest cell index, both at the final column and at every
/// back-pointer.
AttackResult viterbi_attack(const HistoryModel& h, std::span<const LocationSet> steps,
                            ViterbiOptions options = {});

inline constexpr double kMaxBruteForcePaths = 1e6;

/// Scores every state sequence. Throws kInstanceTooLarge above
/// kMaxBruteForcePaths sequences.
AttackResult brute_force_path(const HistoryModel& h, std::span<const LocationSet> steps);

/// Number of steps where the estimate misses the true cell.
std::size_t count_protected(const AttackResult& result, std::span<const CellId> truth);

/// Fraction of steps where the estimate misses the true cell.
double protection_rate(const AttackResult& result, std::span<const CellId> truth);

}  // namespace dummyloc
