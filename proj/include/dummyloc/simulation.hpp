#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dummyloc/grid_model.hpp"

namespace dummyloc {

/// Knobs of the synthetic side-information generator. Cell popularity is
/// Zipf-like over a seeded random ranking of the cells; transitions come from
/// random walks whose steps favor popular cells and decay with distance.
struct SynthParams {
  double skew = 1.0;      // Zipf exponent; 0 gives uniform popularity
  double locality = 1.0;  // decay per cell of step length; infinity keeps only nearest cells
  std::uint32_t radius = 3;
  std::uint64_t queries_per_cell = 20;
  std::size_t walks = 5000;
  std::size_t walk_length = 20;
};

HistoryModel synth_history(const GridSpec& grid, const SynthParams& params, std::uint64_t seed);

/// Random walk over the history: the first cell is drawn by query
/// probability, each next cell from the current cell's full-map transition
/// counts (uniform over the map when the row is empty).
std::vector<CellId> sample_trajectory(const HistoryModel& h, std::size_t length, std::uint64_t seed);

enum class Algorithm { kRandom, kDls, kExhaustive, kGreedy, kRdg };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// What RDG carries from one query to the next as the previous set's weights.
enum class RdgCarry {
  kPosterior,   // sum-product posterior of the submitted set
  kMaxProduct,  // the max-product weights RDG optimized
};

struct CorpusSource {
  std::string path;  // binned corpus, one `user_id<TAB>cell,cell,...` line per record
};

struct ExperimentConfig {
  GridSpec grid;
  std::variant<SynthParams, CorpusSource> history_source = SynthParams{};
  std::vector<std::size_t> k_values = default_k_values();
  std::vector<std::size_t> path_lengths = {2, 3, 4};
  std::size_t repetitions = 300;
  std::vector<Algorithm> algorithms = {Algorithm::kRandom, Algorithm::kDls, Algorithm::kExhaustive,
                                       Algorithm::kGreedy, Algorithm::kRdg};
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool adaptive_adversary = false;
  RdgCarry rdg_carry = RdgCarry::kPosterior;
  double laplace_alpha = 0.0;
  ZeroRowPolicy zero_row_policy = ZeroRowPolicy::kNoEvidence;
  std::size_t pool_multiplier = 4;
  std::size_t exhaustive_subset_cap = 1000;

  static std::vector<std::size_t> default_k_values();
  void validate() const;
};

struct ResultRow {
  Algorithm algorithm = Algorithm::kRandom;
  std::size_t k = 0;
  std::size_t path_length = 0;
  double mean_cell_entropy = 0.0;  // normalized cell-entropy, averaged over steps
  double mean_transition_entropy = 0.0;
  double mean_protection_rate = 0.0;
  double stddev_cell_entropy = 0.0;
  double stddev_transition_entropy = 0.0;
  double stddev_protection_rate = 0.0;
  std::size_t repetitions = 0;  // repetitions that contributed
  std::size_t excluded = 0;     // repetitions that failed and were dropped

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// One simulated user trajectory under one generator.
struct RepetitionOutcome {
  std::vector<CellId> truth;
  std::vector<LocationSet> sets;
  double cell_entropy = 0.0;
  double transition_entropy = 0.0;
  double protection_rate = 0.0;
};

/// Seeds are derived from (cfg.seed, k, repetition) for the real trajectory
/// and (cfg.seed, algorithm, k, repetition, step) for each generated set, so
/// the outcome does not depend on scheduling, every algorithm faces the same
/// real movements, and a shorter run is a prefix of a longer one.
RepetitionOutcome run_repetition(const ExperimentConfig& cfg, const HistoryModel& h,
                                 Algorithm algorithm, std::size_t k, std::size_t length,
                                 std::size_t repetition);

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const HistoryModel& h);

/// Resolves cfg.history_source (synthetic or corpus file) and runs.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

HistoryModel load_history(const ExperimentConfig& cfg);

/// splitmix64-based combination used for every derived seed.
std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts);

}  // namespace dummyloc
