#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dummyloc {

/// Row-major cell index: index = row * n + col.
struct CellId {
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(CellId, CellId) = default;
};

struct GridSpec {
  std::uint32_t n = 100;
  double origin_lat = 0.0;  // south-west corner
  double origin_lon = 0.0;
  double cell_size_km = 0.01;

  std::uint32_t cell_count() const { return n * n; }
  bool contains(CellId c) const { return c.index < cell_count(); }
  std::uint32_t row(CellId c) const { return c.index / n; }
  std::uint32_t col(CellId c) const { return c.index % n; }
  CellId at(std::uint32_t row, std::uint32_t col) const { return CellId{row * n + col}; }

  /// Throws kInvalidArgument unless n >= 1 and cell_size_km > 0.
  void validate() const;
};

/// Probabilities aligned index-for-index with a LocationSet's cells.
using PosteriorVector = std::vector<double>;

/// How a previous-set cell with no recorded transition into the next set is
/// treated by the posterior, max-product and path computations.
enum class ZeroRowPolicy {
  /// The cell moves to every next cell with equal probability.
  kUniform,
  /// The cell carries no evidence and drops out of the mixture; the result is
  /// renormalized over the remaining cells. When no cell of the previous set
  /// has a recorded transition, every row falls back to uniform.
  kNoEvidence,
};

/// One outgoing edge of the transition table.
struct TransitionEntry {
  CellId to;
  std::uint64_t count = 0;
};

/// The adversary's side information: per-cell query counts and per ordered
/// pair transition counts. Immutable once built; copies share storage.
class HistoryModel {
 public:
  class Builder;

  explicit HistoryModel(GridSpec grid);

  const GridSpec& grid() const { return data_->grid; }
  std::uint64_t total_queries() const { return data_->total_queries; }
  std::uint64_t query_count(CellId c) const;
  std::span<const std::uint64_t> query_counts() const { return data_->query_count; }

  std::uint64_t transition_count(CellId from, CellId to) const;
  /// Outgoing edges of `from`, sorted by target cell.
  std::span<const TransitionEntry> row(CellId from) const;
  /// Sum of every outgoing count of `from` over the whole map.
  std::uint64_t row_total(CellId from) const;
  std::size_t transition_pairs() const { return data_->entries.size(); }

  /// Add-alpha smoothing applied by transition_probabilities (0 = off).
  double smoothing() const { return smoothing_; }
  HistoryModel with_smoothing(double alpha) const;

  ZeroRowPolicy zero_row_policy() const { return zero_rows_; }
  HistoryModel with_zero_row_policy(ZeroRowPolicy policy) const;

  /// Copy with one extra query recorded per listed cell; transitions shared.
  HistoryModel with_extra_queries(std::span<const CellId> cells) const;

  friend bool operator==(const HistoryModel& a, const HistoryModel& b);

 private:
  struct Data {
    GridSpec grid;
    std::vector<std::uint64_t> query_count;
    std::uint64_t total_queries = 0;
    // CSR layout: entries[offsets[a] .. offsets[a+1]) are the edges out of a.
    std::vector<std::size_t> offsets;
    std::vector<TransitionEntry> entries;
    std::vector<std::uint64_t> row_total;
  };

  explicit HistoryModel(std::shared_ptr<const Data> data, double smoothing = 0.0,
                        ZeroRowPolicy zero_rows = ZeroRowPolicy::kUniform)
      : data_(std::move(data)), smoothing_(smoothing), zero_rows_(zero_rows) {}

  void check(CellId c) const;

  std::shared_ptr<const Data> data_;
  double smoothing_ = 0.0;
  ZeroRowPolicy zero_rows_ = ZeroRowPolicy::kUniform;
};

class HistoryModel::Builder {
 public:
  explicit Builder(GridSpec grid);

  Builder& add_query(CellId cell, std::uint64_t count = 1);
  Builder& add_transition(CellId from, CellId to, std::uint64_t count = 1);
  HistoryModel build() const;

 private:
  GridSpec grid_;
  std::vector<std::uint64_t> query_count_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs_;  // (from*N+to, count)
};

/// One query's k cells: the real location plus k-1 dummies.
class LocationSet {
 public:
  /// Throws kInvalidArgument on an empty list, duplicates, or a bad real_index.
  explicit LocationSet(std::vector<CellId> cells, std::size_t real_index = 0);

  std::span<const CellId> cells() const { return cells_; }
  std::size_t k() const { return cells_.size(); }
  std::size_t real_index() const { return real_index_; }
  CellId real() const { return cells_[real_index_]; }
  CellId operator[](std::size_t i) const { return cells_[i]; }
  bool contains(CellId c) const;

  friend bool operator==(const LocationSet&, const LocationSet&) = default;

 private:
  std::vector<CellId> cells_;
  std::size_t real_index_ = 0;
};

struct TrajectoryQuery {
  std::vector<LocationSet> steps;
  std::string user_id;
};

/// One user's ordered cell sequence as recorded in a corpus.
struct TrajectoryRecord {
  std::string user_id;
  std::vector<CellId> cells;
};

HistoryModel build_history(std::span<const TrajectoryRecord> records, const GridSpec& grid);

/// Share of all map queries landing on `cell`. Throws kEmptyHistory.
double query_probability(const HistoryModel& h, CellId cell);

/// Query probabilities of the set's cells renormalized within the set.
/// Throws kAllZeroPriors when no cell of the set was ever queried.
PosteriorVector normalized_priors(const HistoryModel& h, const LocationSet& ls);

/// Pr(from => y) for every y of next_set, with the denominator restricted to
/// next_set. A source with no transitions into next_set yields the uniform
/// vector.
PosteriorVector transition_probabilities(const HistoryModel& h, CellId from,
                                         const LocationSet& next_set);

/// Row x holds the probabilities of moving from prev[x] into `next` as used
/// by the inference routines: transition_probabilities, except that under
/// ZeroRowPolicy::kNoEvidence a row with no recorded transition is all zeros
/// (unless every row is, in which case all rows are uniform).
std::vector<PosteriorVector> transition_matrix(const HistoryModel& h, const LocationSet& prev,
                                               const LocationSet& next);

}  // namespace dummyloc
