#include <gtest/gtest.h>

#include <functional>
#include <numeric>
#include <random>

#include "dummyloc/error.hpp"
#include "dummyloc/grid_model.hpp"
#include "oracles.hpp"

using namespace dummyloc;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dummyloc::Error thrown";
  return ErrorCode::kInvalidArgument;
}

std::vector<TrajectoryRecord> random_records(std::uint32_t n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> cell(0, n * n - 1);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  std::vector<TrajectoryRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    TrajectoryRecord r{"u" + std::to_string(i), {}};
    for (std::size_t j = len(rng); j > 0; --j) r.cells.push_back(CellId{cell(rng)});
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(GridSpec, RowMajorIndexing) {
  GridSpec g{10};
  EXPECT_EQ(g.at(2, 3).index, 23u);
  EXPECT_EQ(g.row(CellId{23}), 2u);
  EXPECT_EQ(g.col(CellId{23}), 3u);
  EXPECT_TRUE(g.contains(CellId{99}));
  EXPECT_FALSE(g.contains(CellId{100}));
}

TEST(GridSpec, RejectsDegenerateShapes) {
  EXPECT_EQ(code_of([] { GridSpec{0}.validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { GridSpec{4, 0, 0, 0.0}.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(BuildHistory, EmptyCorpus) {
  const auto h = build_history({}, GridSpec{10});
  EXPECT_EQ(h.total_queries(), 0u);
  EXPECT_EQ(h.transition_pairs(), 0u);
  for (auto q : h.query_counts()) EXPECT_EQ(q, 0u);
}

TEST(BuildHistory, SinglePair) {
  std::vector<TrajectoryRecord> rec{{"a", {CellId{3}, CellId{7}}}};
  const auto h = build_history(rec, GridSpec{10});
  EXPECT_EQ(h.query_count(CellId{3}), 1u);
  EXPECT_EQ(h.query_count(CellId{7}), 1u);
  EXPECT_EQ(h.transition_count(CellId{3}, CellId{7}), 1u);
  EXPECT_EQ(h.transition_count(CellId{7}, CellId{3}), 0u);
  EXPECT_EQ(h.total_queries(), 2u);
}

TEST(BuildHistory, MatchesRecount) {
  const auto records = random_records(6, 100, 11);
  const auto h = build_history(records, GridSpec{6});
  const auto r = oracle::recount(records);
  std::uint64_t total = 0;
  for (std::uint32_t c = 0; c < 36; ++c) {
    const auto it = r.queries.find(c);
    EXPECT_EQ(h.query_count(CellId{c}), it == r.queries.end() ? 0u : it->second);
    total += h.query_count(CellId{c});
    for (std::uint32_t d = 0; d < 36; ++d) {
      const auto jt = r.transitions.find({c, d});
      EXPECT_EQ(h.transition_count(CellId{c}, CellId{d}), jt == r.transitions.end() ? 0u : jt->second);
    }
  }
  EXPECT_EQ(total, h.total_queries());
}

TEST(BuildHistory, RowTotalsCountNonFinalOccurrences) {
  const auto records = random_records(5, 60, 12);
  const auto h = build_history(records, GridSpec{5});
  std::vector<std::uint64_t> non_final(25, 0);
  for (const auto& r : records) {
    for (std::size_t i = 0; i + 1 < r.cells.size(); ++i) ++non_final[r.cells[i].index];
  }
  for (std::uint32_t c = 0; c < 25; ++c) {
    std::uint64_t sum = 0;
    for (const auto& e : h.row(CellId{c})) sum += e.count;
    EXPECT_EQ(sum, non_final[c]);
    EXPECT_EQ(h.row_total(CellId{c}), non_final[c]);
  }
}

TEST(BuildHistory, RejectsOutOfGridCells) {
  std::vector<TrajectoryRecord> rec{{"a", {CellId{3}, CellId{100}}}};
  EXPECT_EQ(code_of([&] { build_history(rec, GridSpec{10}); }), ErrorCode::kCellOutOfGrid);
}

TEST(QueryProbability, DirectRatio) {
  HistoryModel::Builder b(GridSpec{10});
  b.add_query(CellId{1}, 5).add_query(CellId{2}, 45);
  const auto h = b.build();
  EXPECT_DOUBLE_EQ(query_probability(h, CellId{1}), 0.1);
  EXPECT_EQ(query_probability(h, CellId{3}), 0.0);
}

TEST(QueryProbability, SumsToOne) {
  const auto h = oracle::random_history(6, 3);
  double sum = 0.0;
  for (std::uint32_t c = 0; c < 36; ++c) sum += query_probability(h, CellId{c});
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(QueryProbability, EmptyHistoryThrows) {
  const HistoryModel h(GridSpec{3});
  EXPECT_EQ(code_of([&] { query_probability(h, CellId{0}); }), ErrorCode::kEmptyHistory);
}

TEST(NormalizedPriors, ThreeCellWeights) {
  // Query probabilities 0.3, 0.1, 0.1 out of a larger map.
  HistoryModel::Builder b(GridSpec{4});
  b.add_query(CellId{0}, 3).add_query(CellId{1}, 1).add_query(CellId{2}, 1).add_query(CellId{9}, 5);
  const auto p = normalized_priors(b.build(), LocationSet({CellId{0}, CellId{1}, CellId{2}}));
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.2, 1e-15);
  EXPECT_NEAR(p[2], 0.2, 1e-15);
}

TEST(NormalizedPriors, UniformCounts) {
  HistoryModel::Builder b(GridSpec{4});
  for (std::uint32_t c = 0; c < 16; ++c) b.add_query(CellId{c}, 7);
  const auto p = normalized_priors(b.build(), LocationSet({CellId{1}, CellId{5}, CellId{9}, CellId{13}}));
  for (double v : p) EXPECT_EQ(v, 0.25);
}

TEST(NormalizedPriors, MatchesOracle) {
  const auto h = oracle::random_history(6, 4);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto ls = oracle::random_set(6, 8, rng);
    const auto p = normalized_priors(h, ls);
    const auto q = oracle::priors(h, ls);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-15);
  }
}

TEST(NormalizedPriors, AllZeroThrows) {
  HistoryModel::Builder b(GridSpec{4});
  b.add_query(CellId{5});
  EXPECT_EQ(code_of([&] { normalized_priors(b.build(), LocationSet({CellId{0}, CellId{1}})); }),
            ErrorCode::kAllZeroPriors);
}

TEST(TransitionProbabilities, PartialRowCounts) {
  HistoryModel::Builder b(GridSpec{4});
  b.add_transition(CellId{0}, CellId{4}, 1).add_transition(CellId{0}, CellId{5}, 2);
  b.add_transition(CellId{0}, CellId{6}, 1).add_transition(CellId{0}, CellId{15}, 40);
  const auto p = transition_probabilities(b.build(), CellId{0}, LocationSet({CellId{4}, CellId{5}, CellId{6}}));
  EXPECT_EQ(p, (PosteriorVector{0.25, 0.5, 0.25}));
}

TEST(TransitionProbabilities, ZeroRowIsUniform) {
  const HistoryModel h(GridSpec{4});
  const auto p = transition_probabilities(h, CellId{0}, LocationSet({CellId{1}, CellId{2}, CellId{3}}));
  for (double v : p) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(TransitionProbabilities, MatchesOracle) {
  const auto h = oracle::random_history(5, 5, 0.3);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto ls = oracle::random_set(5, 6, rng);
    const CellId from{static_cast<std::uint32_t>(rng() % 25)};
    const auto p = transition_probabilities(h, from, ls);
    const auto q = oracle::row(h, from, ls);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(p[i], q[i], 1e-15);
      EXPECT_GE(p[i], 0.0);
      EXPECT_LE(p[i], 1.0);
      sum += p[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(TransitionProbabilities, LaplaceSmoothing) {
  HistoryModel::Builder b(GridSpec{4});
  b.add_transition(CellId{0}, CellId{1}, 2);
  const auto h = b.build().with_smoothing(1.0);
  const auto p = transition_probabilities(h, CellId{0}, LocationSet({CellId{1}, CellId{2}}));
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
}

TEST(HistoryModel, ScalingInvariance) {
  const auto h = oracle::random_history(4, 6, 0.4);
  HistoryModel::Builder b(GridSpec{4});
  for (std::uint32_t a = 0; a < 16; ++a) {
    b.add_query(CellId{a}, 7 * h.query_count(CellId{a}));
    for (const auto& e : h.row(CellId{a})) b.add_transition(CellId{a}, e.to, 7 * e.count);
  }
  const auto h7 = b.build();
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const auto ls = oracle::random_set(4, 5, rng);
    const CellId c{static_cast<std::uint32_t>(rng() % 16)};
    EXPECT_NEAR(query_probability(h, c), query_probability(h7, c), 1e-12);
    const auto p = normalized_priors(h, ls);
    const auto q = normalized_priors(h7, ls);
    const auto r = transition_probabilities(h, c, ls);
    const auto s = transition_probabilities(h7, c, ls);
    for (std::size_t i = 0; i < ls.k(); ++i) {
      EXPECT_NEAR(p[i], q[i], 1e-12);
      EXPECT_NEAR(r[i], s[i], 1e-12);
    }
  }
}

TEST(HistoryModel, ExtraQueriesLeaveOriginalUntouched) {
  const auto h = oracle::random_history(3, 7);
  const std::vector<CellId> cells{CellId{0}, CellId{4}};
  const auto h2 = h.with_extra_queries(cells);
  EXPECT_EQ(h2.query_count(CellId{0}), h.query_count(CellId{0}) + 1);
  EXPECT_EQ(h2.total_queries(), h.total_queries() + 2);
  EXPECT_EQ(h2.transition_count(CellId{0}, CellId{4}), h.transition_count(CellId{0}, CellId{4}));
  EXPECT_FALSE(h == h2);
}

TEST(LocationSet, Invariants) {
  EXPECT_EQ(code_of([] { LocationSet({}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { LocationSet({CellId{1}, CellId{1}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { LocationSet({CellId{1}, CellId{2}}, 2); }), ErrorCode::kInvalidArgument);
  const LocationSet ls({CellId{4}, CellId{9}}, 1);
  EXPECT_EQ(ls.real(), CellId{9});
  EXPECT_EQ(ls.k(), 2u);
  EXPECT_TRUE(ls.contains(CellId{4}));
  EXPECT_FALSE(ls.contains(CellId{5}));
}

TEST(TransitionMatrix, NoEvidenceZeroesSilentRows) {
  HistoryModel::Builder b(GridSpec{4});
  b.add_transition(CellId{0}, CellId{4}, 3).add_transition(CellId{0}, CellId{5}, 1);
  const auto h = b.build();
  const LocationSet prev({CellId{0}, CellId{1}});
  const LocationSet next({CellId{4}, CellId{5}});
  const auto uniform = transition_matrix(h, prev, next);
  EXPECT_EQ(uniform[1], (PosteriorVector{0.5, 0.5}));
  const auto dropped = transition_matrix(h.with_zero_row_policy(ZeroRowPolicy::kNoEvidence), prev, next);
  EXPECT_EQ(dropped[0], (PosteriorVector{0.75, 0.25}));
  EXPECT_EQ(dropped[1], (PosteriorVector{0.0, 0.0}));
  const auto silent = transition_matrix(h.with_zero_row_policy(ZeroRowPolicy::kNoEvidence), next, prev);
  EXPECT_EQ(silent[0], (PosteriorVector{0.5, 0.5}));
}
