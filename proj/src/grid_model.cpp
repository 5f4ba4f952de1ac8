#include "dummyloc/grid_model.hpp"

#include <algorithm>
#include <string>

#include "dummyloc/error.hpp"

namespace dummyloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kCellOutOfGrid: return "CellOutOfGrid";
    case ErrorCode::kEmptyHistory: return "EmptyHistory";
    case ErrorCode::kAllZeroPriors: return "AllZeroPriors";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kPoolTooLarge: return "PoolTooLarge";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kFileUnreadable: return "FileUnreadable";
    case ErrorCode::kHeaderTooShort: return "HeaderTooShort";
    case ErrorCode::kWriteFailed: return "WriteFailed";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

void GridSpec::validate() const {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "grid side length must be >= 1");
  if (n > 65535) throw Error(ErrorCode::kInvalidArgument, "grid side length too large");
  if (!(cell_size_km > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cell size must be positive");
}

// --- HistoryModel ----------------------------------------------------------

HistoryModel::HistoryModel(GridSpec grid) : HistoryModel(Builder(grid).build()) {}

void HistoryModel::check(CellId c) const {
  if (!data_->grid.contains(c)) {
    throw Error(ErrorCode::kCellOutOfGrid, "cell " + std::to_string(c.index) + " outside " +
                                               std::to_string(data_->grid.n) + "x" +
                                               std::to_string(data_->grid.n) + " grid");
  }
}

std::uint64_t HistoryModel::query_count(CellId c) const {
  check(c);
  return data_->query_count[c.index];
}

std::span<const TransitionEntry> HistoryModel::row(CellId from) const {
  check(from);
  const auto begin = data_->offsets[from.index];
  const auto end = data_->offsets[from.index + 1];
  return std::span<const TransitionEntry>(data_->entries).subspan(begin, end - begin);
}

std::uint64_t HistoryModel::transition_count(CellId from, CellId to) const {
  check(to);
  const auto edges = row(from);
  const auto it = std::lower_bound(edges.begin(), edges.end(), to,
                                   [](const TransitionEntry& e, CellId c) { return e.to < c; });
  return (it != edges.end() && it->to == to) ? it->count : 0;
}

std::uint64_t HistoryModel::row_total(CellId from) const {
  check(from);
  return data_->row_total[from.index];
}

HistoryModel HistoryModel::with_smoothing(double alpha) const {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "smoothing alpha must be >= 0");
  return HistoryModel(data_, alpha, zero_rows_);
}

HistoryModel HistoryModel::with_zero_row_policy(ZeroRowPolicy policy) const {
  return HistoryModel(data_, smoothing_, policy);
}

HistoryModel HistoryModel::with_extra_queries(std::span<const CellId> cells) const {
  auto data = std::make_shared<Data>(*data_);
  for (CellId c : cells) {
    check(c);
    ++data->query_count[c.index];
    ++data->total_queries;
  }
  return HistoryModel(std::move(data), smoothing_, zero_rows_);
}

bool operator==(const HistoryModel& a, const HistoryModel& b) {
  if (a.smoothing_ != b.smoothing_ || a.zero_rows_ != b.zero_rows_) return false;
  if (a.data_ == b.data_) return true;
  const auto& x = *a.data_;
  const auto& y = *b.data_;
  if (x.grid.n != y.grid.n || x.total_queries != y.total_queries ||
      x.query_count != y.query_count || x.offsets != y.offsets ||
      x.entries.size() != y.entries.size()) {
    return false;
  }
  for (std::size_t i = 0; i < x.entries.size(); ++i) {
    if (x.entries[i].to != y.entries[i].to || x.entries[i].count != y.entries[i].count) return false;
  }
  return true;
}

HistoryModel::Builder::Builder(GridSpec grid) : grid_(grid) {
  grid_.validate();
  query_count_.assign(grid_.cell_count(), 0);
}

HistoryModel::Builder& HistoryModel::Builder::add_query(CellId cell, std::uint64_t count) {
  if (!grid_.contains(cell)) {
    throw Error(ErrorCode::kCellOutOfGrid, "cell " + std::to_string(cell.index) + " outside grid");
  }
  query_count_[cell.index] += count;
  return *this;
}

HistoryModel::Builder& HistoryModel::Builder::add_transition(CellId from, CellId to,
                                                             std::uint64_t count) {
  if (!grid_.contains(from) || !grid_.contains(to)) {
    throw Error(ErrorCode::kCellOutOfGrid, "transition endpoint outside grid");
  }
  if (count > 0) {
    pairs_.emplace_back(std::uint64_t{from.index} * grid_.cell_count() + to.index, count);
  }
  return *this;
}

HistoryModel HistoryModel::Builder::build() const {
  auto data = std::make_shared<Data>();
  const std::uint64_t cells = grid_.cell_count();
  data->grid = grid_;
  data->query_count = query_count_;
  for (auto c : query_count_) data->total_queries += c;

  auto pairs = pairs_;
  std::sort(pairs.begin(), pairs.end());
  data->offsets.assign(cells + 1, 0);
  data->row_total.assign(cells, 0);
  for (std::size_t i = 0; i < pairs.size();) {
    const auto key = pairs[i].first;
    std::uint64_t sum = 0;
    for (; i < pairs.size() && pairs[i].first == key; ++i) sum += pairs[i].second;
    const auto from = static_cast<std::uint32_t>(key / cells);
    const auto to = static_cast<std::uint32_t>(key % cells);
    data->entries.push_back(TransitionEntry{CellId{to}, sum});
    ++data->offsets[from + 1];
    data->row_total[from] += sum;
  }
  for (std::uint64_t c = 0; c < cells; ++c) data->offsets[c + 1] += data->offsets[c];
  return HistoryModel(std::move(data));
}

// --- LocationSet -----------------------------------------------------------

LocationSet::LocationSet(std::vector<CellId> cells, std::size_t real_index)
    : cells_(std::move(cells)), real_index_(real_index) {
  if (cells_.empty()) throw Error(ErrorCode::kInvalidArgument, "location set must hold k >= 1 cells");
  if (real_index_ >= cells_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "real_index out of range");
  }
  auto sorted = cells_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::kInvalidArgument, "location set cells must be distinct");
  }
}

bool LocationSet::contains(CellId c) const {
  return std::find(cells_.begin(), cells_.end(), c) != cells_.end();
}

// --- operations ------------------------------------------------------------

HistoryModel build_history(std::span<const TrajectoryRecord> records, const GridSpec& grid) {
  HistoryModel::Builder builder(grid);
  for (const auto& record : records) {
    for (std::size_t i = 0; i < record.cells.size(); ++i) {
      builder.add_query(record.cells[i]);
      if (i + 1 < record.cells.size()) builder.add_transition(record.cells[i], record.cells[i + 1]);
    }
  }
  return builder.build();
}

double query_probability(const HistoryModel& h, CellId cell) {
  if (h.total_queries() == 0) throw Error(ErrorCode::kEmptyHistory, "history holds no queries");
  return static_cast<double>(h.query_count(cell)) / static_cast<double>(h.total_queries());
}

PosteriorVector normalized_priors(const HistoryModel& h, const LocationSet& ls) {
  // Normalizing raw counts gives the same ratios as normalizing b_j and
  // avoids a rounding step.
  std::uint64_t sum = 0;
  for (CellId c : ls.cells()) sum += h.query_count(c);
  if (sum == 0) throw Error(ErrorCode::kAllZeroPriors, "no cell of the location set was ever queried");
  PosteriorVector out;
  out.reserve(ls.k());
  for (CellId c : ls.cells()) {
    out.push_back(static_cast<double>(h.query_count(c)) / static_cast<double>(sum));
  }
  return out;
}

PosteriorVector transition_probabilities(const HistoryModel& h, CellId from,
                                         const LocationSet& next_set) {
  const auto k = next_set.k();
  PosteriorVector out(k);
  std::uint64_t sum = 0;
  for (std::size_t y = 0; y < k; ++y) {
    const auto n = h.transition_count(from, next_set[y]);
    out[y] = static_cast<double>(n);
    sum += n;
  }
  const double alpha = h.smoothing();
  if (sum == 0 && alpha == 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(k));
    return out;
  }
  const double denom = static_cast<double>(sum) + alpha * static_cast<double>(k);
  for (auto& p : out) p = (p + alpha) / denom;
  return out;
}

std::vector<PosteriorVector> transition_matrix(const HistoryModel& h, const LocationSet& prev,
                                               const LocationSet& next) {
  std::vector<PosteriorVector> rows;
  rows.reserve(prev.k());
  for (CellId c : prev.cells()) rows.push_back(transition_probabilities(h, c, next));
  if (h.zero_row_policy() == ZeroRowPolicy::kUniform || h.smoothing() > 0.0) return rows;

  std::vector<bool> silent(prev.k());
  bool any_evidence = false;
  for (std::size_t x = 0; x < prev.k(); ++x) {
    std::uint64_t sum = 0;
    for (CellId y : next.cells()) sum += h.transition_count(prev[x], y);
    silent[x] = sum == 0;
    any_evidence = any_evidence || !silent[x];
  }
  if (!any_evidence) return rows;
  for (std::size_t x = 0; x < prev.k(); ++x) {
    if (silent[x]) std::fill(rows[x].begin(), rows[x].end(), 0.0);
  }
  return rows;
}

}  // namespace dummyloc
