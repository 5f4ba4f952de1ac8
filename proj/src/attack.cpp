#include "dummyloc/attack.hpp"

#include <cmath>
#include <limits>

#include "dummyloc/error.hpp"

namespace dummyloc {
namespace {

using Matrix = std::vector<PosteriorVector>;

void check_steps(std::span<const LocationSet> steps) {
  if (steps.empty()) throw Error(ErrorCode::kInvalidArgument, "trajectory needs at least one step");
}

/// Index of the maximum of `score` over `set`; ties to the lowest cell index.
std::size_t argmax(std::span<const double> score, const LocationSet& set) {
  std::size_t best = 0;
  for (std::size_t u = 1; u < score.size(); ++u) {
    if (score[u] > score[best] || (score[u] == score[best] && set[u] < set[best])) best = u;
  }
  return best;
}

}  // namespace

AttackResult viterbi_attack(const HistoryModel& h, std::span<const LocationSet> steps,
                            ViterbiOptions options) {
  check_steps(steps);
  const auto lift = [&](double p) {
    return options.log_space ? (p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity())
                             : p;
  };
  const auto extend = [&](double mu, double p) { return options.log_space ? mu + lift(p) : mu * p; };

  PosteriorVector mu = normalized_priors(h, steps[0]);
  for (auto& m : mu) m = lift(m);
  // pointer[j][u]: index in steps[j-1] of u's best predecessor; valid for j >= 1.
  std::vector<std::vector<std::size_t>> pointer(steps.size());

  for (std::size_t j = 1; j < steps.size(); ++j) {
    const auto& prev = steps[j - 1];
    const auto& cur = steps[j];
    const auto rows = transition_matrix(h, prev, cur);
    PosteriorVector next(cur.k());
    pointer[j].assign(cur.k(), 0);
    for (std::size_t u = 0; u < cur.k(); ++u) {
      std::size_t best = 0;
      double best_score = extend(mu[0], rows[0][u]);
      for (std::size_t x = 1; x < prev.k(); ++x) {
        const double s = extend(mu[x], rows[x][u]);
        if (s > best_score || (s == best_score && prev[x] < prev[best])) {
          best = x;
          best_score = s;
        }
      }
      next[u] = best_score;
      pointer[j][u] = best;
    }
    mu = std::move(next);
  }

  AttackResult result;
  result.estimated.resize(steps.size());
  std::size_t state = argmax(mu, steps.back());
  const double score = mu[state];
  for (std::size_t j = steps.size(); j-- > 0;) {
    result.estimated[j] = steps[j][state];
    if (j > 0) state = pointer[j][state];
  }
  if (options.log_space) {
    result.log_path_score = score;
    result.path_score = std::exp(score);
  } else {
    result.path_score = score;
    result.log_path_score = score > 0.0 ? std::log(score) : -std::numeric_limits<double>::infinity();
  }
  return result;
}

AttackResult brute_force_path(const HistoryModel& h, std::span<const LocationSet> steps) {
  check_steps(steps);
  double paths = 1.0;
  for (const auto& s : steps) paths *= static_cast<double>(s.k());
  if (paths > kMaxBruteForcePaths) {
    throw Error(ErrorCode::kInstanceTooLarge, "brute force over more than 1e6 paths");
  }
  const auto prior = normalized_priors(h, steps[0]);
  std::vector<Matrix> rows;
  for (std::size_t j = 1; j < steps.size(); ++j) rows.push_back(transition_matrix(h, steps[j - 1], steps[j]));

  // Reverse-lexicographic comparison by cell: among equal scores prefer the
  // lower final cell, then the lower cell one step earlier, and so on.
  const auto prefer = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t j = steps.size(); j-- > 0;) {
      if (a[j] != b[j]) return steps[j][a[j]] < steps[j][b[j]];
    }
    return false;
  };

  std::vector<std::size_t> idx(steps.size(), 0);
  std::vector<std::size_t> best_path;
  double best_score = -1.0;
  while (true) {
    double score = prior[idx[0]];
    for (std::size_t j = 1; j < steps.size(); ++j) score *= rows[j - 1][idx[j - 1]][idx[j]];
    if (score > best_score || (score == best_score && prefer(idx, best_path))) {
      best_score = score;
      best_path = idx;
    }
    std::size_t j = 0;
    while (j < steps.size() && ++idx[j] == steps[j].k()) idx[j++] = 0;
    if (j == steps.size()) break;
  }

  AttackResult result;
  for (std::size_t j = 0; j < steps.size(); ++j) result.estimated.push_back(steps[j][best_path[j]]);
  result.path_score = best_score;
  result.log_path_score =
      best_score > 0.0 ? std::log(best_score) : -std::numeric_limits<double>::infinity();
  return result;
}

std::size_t count_protected(const AttackResult& result, std::span<const CellId> truth) {
  if (result.estimated.size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch, "estimate and truth differ in length");
  }
  std::size_t hidden = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hidden += result.estimated[i] != truth[i];
  return hidden;
}

double protection_rate(const AttackResult& result, std::span<const CellId> truth) {
  const auto hidden = count_protected(result, truth);
  if (truth.empty()) return 0.0;
  return static_cast<double>(hidden) / static_cast<double>(truth.size());
}

}  // namespace dummyloc
