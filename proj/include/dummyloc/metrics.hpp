#pragma once

#include <span>

#include "dummyloc/grid_model.hpp"

namespace dummyloc {

/// Shannon entropy in bits, with 0 log 0 = 0.
double entropy(std::span<const double> p);

/// Entropy of the raw map-wide query probabilities of the set's cells. These
/// need not sum to one within the set.
double cell_entropy(const HistoryModel& h, const LocationSet& ls);

/// Entropy of the set's normalized priors; bounded by log2 k, which makes it
/// the variant used when comparing generators.
double normalized_cell_entropy(const HistoryModel& h, const LocationSet& ls);

/// Probability that each cell of `next` is the real location given the
/// previous set and its (normalized) priors.
PosteriorVector posterior_pair(const HistoryModel& h, const LocationSet& prev,
                               std::span<const double> prev_priors, const LocationSet& next);

double transition_entropy_pair(const HistoryModel& h, const LocationSet& prev,
                               const LocationSet& next);

/// Forward recursion over a chain of submitted sets. Only the first set's
/// query probabilities are used; each later step takes the previous posterior
/// as its prior.
PosteriorVector posterior_trajectory(const HistoryModel& h, std::span<const LocationSet> steps);

double transition_entropy_trajectory(const HistoryModel& h, std::span<const LocationSet> steps);

}  // namespace dummyloc
