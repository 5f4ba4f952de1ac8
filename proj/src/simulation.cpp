#include "dummyloc/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <random>
#include <thread>

#include "dummyloc/attack.hpp"
#include "dummyloc/error.hpp"
#include "dummyloc/generators.hpp"
#include "dummyloc/io.hpp"
#include "dummyloc/metrics.hpp"

namespace dummyloc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kTrajectoryTag = 0x7472616aULL;
constexpr std::uint64_t kGeneratorTag = 0x67656e65ULL;
constexpr std::uint64_t kHistoryTag = 0x68697374ULL;

struct Neighbor {
  std::uint32_t cell;
  double weight;
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(seed);
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kRandom: return "random";
    case Algorithm::kDls: return "dls";
    case Algorithm::kExhaustive: return "exhaustive";
    case Algorithm::kGreedy: return "greedy";
    case Algorithm::kRdg: return "rdg";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::kRandom, Algorithm::kDls, Algorithm::kExhaustive, Algorithm::kGreedy,
                 Algorithm::kRdg}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::vector<std::size_t> ExperimentConfig::default_k_values() {
  std::vector<std::size_t> ks;
  for (std::size_t k = 2; k <= 30; ++k) ks.push_back(k);
  return ks;
}

void ExperimentConfig::validate() const {
  grid.validate();
  if (repetitions < 1) throw Error(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
  for (auto k : k_values) {
    if (k < 2) throw Error(ErrorCode::kInvalidArgument, "every k must be >= 2");
    if (k > grid.cell_count()) throw Error(ErrorCode::kKTooLarge, "k exceeds the grid");
  }
  for (auto len : path_lengths) {
    if (len < 2) throw Error(ErrorCode::kInvalidArgument, "every path length must be >= 2");
  }
  if (pool_multiplier < 1) throw Error(ErrorCode::kInvalidArgument, "pool_multiplier must be >= 1");
  if (exhaustive_subset_cap < 1) {
    throw Error(ErrorCode::kInvalidArgument, "exhaustive_subset_cap must be >= 1");
  }
  if (!(laplace_alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "laplace_alpha must be >= 0");
  if (const auto* p = std::get_if<SynthParams>(&history_source)) {
    if (!(p->skew >= 0.0) || !(p->locality >= 0.0) || p->radius < 1 || p->walk_length < 1) {
      throw Error(ErrorCode::kInvalidArgument, "invalid synthetic history parameters");
    }
  }
}

HistoryModel synth_history(const GridSpec& grid, const SynthParams& params, std::uint64_t seed) {
  grid.validate();
  if (!(params.skew >= 0.0) || !(params.locality >= 0.0) || params.radius < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid synthetic history parameters");
  }
  const std::uint32_t cells = grid.cell_count();
  std::mt19937_64 rng(seed);

  std::vector<std::uint32_t> rank(cells);
  for (std::uint32_t i = 0; i < cells; ++i) rank[i] = i + 1;
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<double> popularity(cells);
  for (std::uint32_t c = 0; c < cells; ++c) {
    popularity[c] = std::pow(static_cast<double>(rank[c]), -params.skew);
  }

  HistoryModel::Builder builder(grid);
  {
    std::discrete_distribution<std::uint32_t> pick(popularity.begin(), popularity.end());
    std::vector<std::uint64_t> counts(cells, 0);
    const std::uint64_t draws = params.queries_per_cell * cells;
    for (std::uint64_t i = 0; i < draws; ++i) ++counts[pick(rng)];
    for (std::uint32_t c = 0; c < cells; ++c) builder.add_query(CellId{c}, counts[c]);
  }

  const int r = static_cast<int>(params.radius);
  const bool nearest_only = std::isinf(params.locality);
  const auto neighbors_of = [&](std::uint32_t cell) {
    std::vector<Neighbor> out;
    const int row = static_cast<int>(cell / grid.n);
    const int col = static_cast<int>(cell % grid.n);
    const int n = static_cast<int>(grid.n);
    for (int dr = -r; dr <= r; ++dr) {
      for (int dc = -r; dc <= r; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int rr = row + dr;
        const int cc = col + dc;
        if (rr < 0 || cc < 0 || rr >= n || cc >= n) continue;
        const double d = std::sqrt(static_cast<double>(dr * dr + dc * dc));
        if (d > params.radius) continue;
        if (nearest_only && d > 1.0) continue;
        const double decay = nearest_only ? 1.0 : std::exp(-params.locality * (d - 1.0));
        const auto target = static_cast<std::uint32_t>(rr * n + cc);
        out.push_back(Neighbor{target, popularity[target] * decay});
      }
    }
    return out;
  };

  std::discrete_distribution<std::uint32_t> start(popularity.begin(), popularity.end());
  std::vector<double> weights;
  for (std::size_t w = 0; w < params.walks; ++w) {
    std::uint32_t cur = start(rng);
    for (std::size_t s = 1; s < params.walk_length; ++s) {
      const auto nb = neighbors_of(cur);
      if (nb.empty()) break;
      weights.clear();
      for (const auto& e : nb) weights.push_back(e.weight);
      std::discrete_distribution<std::size_t> step(weights.begin(), weights.end());
      const auto next = nb[step(rng)].cell;
      builder.add_transition(CellId{cur}, CellId{next});
      cur = next;
    }
  }
  return builder.build();
}

std::vector<CellId> sample_trajectory(const HistoryModel& h, std::size_t length, std::uint64_t seed) {
  if (h.total_queries() == 0) throw Error(ErrorCode::kEmptyHistory, "history holds no queries");
  if (length > 1 && h.transition_pairs() == 0) {
    throw Error(ErrorCode::kEmptyHistory, "history holds no transitions");
  }
  std::mt19937_64 rng(seed);
  const auto counts = h.query_counts();
  std::discrete_distribution<std::uint32_t> first(counts.begin(), counts.end());
  std::vector<CellId> path;
  path.reserve(length);
  if (length == 0) return path;
  path.push_back(CellId{first(rng)});
  std::vector<double> weights;
  while (path.size() < length) {
    const auto edges = h.row(path.back());
    if (edges.empty()) {
      std::uniform_int_distribution<std::uint32_t> any(0, h.grid().cell_count() - 1);
      path.push_back(CellId{any(rng)});
      continue;
    }
    weights.clear();
    for (const auto& e : edges) weights.push_back(static_cast<double>(e.count));
    std::discrete_distribution<std::size_t> step(weights.begin(), weights.end());
    path.push_back(edges[step(rng)].to);
  }
  return path;
}

RepetitionOutcome run_repetition(const ExperimentConfig& cfg, const HistoryModel& base,
                                 Algorithm algorithm, std::size_t k, std::size_t length,
                                 std::size_t repetition) {
  RepetitionOutcome out;
  out.truth = sample_trajectory(base, length, mix_seed(cfg.seed, {kTrajectoryTag, k, repetition}));

  HistoryModel h = base;
  PosteriorVector carried;  // RDG's weights for the previous set
  for (std::size_t step = 0; step < length; ++step) {
    GeneratorContext ctx(
        h, mix_seed(cfg.seed, {kGeneratorTag, static_cast<std::uint64_t>(algorithm), k,
                               repetition, step}));
    ctx.pool_multiplier = cfg.pool_multiplier;
    ctx.exhaustive_subset_cap = cfg.exhaustive_subset_cap;
    const CellId real = out.truth[step];

    if (algorithm == Algorithm::kRandom) {
      out.sets.push_back(random_gen(ctx, real, k));
    } else if (step == 0 || algorithm == Algorithm::kDls) {
      out.sets.push_back(dls_gen(ctx, real, k));
      if (algorithm == Algorithm::kRdg) carried = normalized_priors(h, out.sets.back());
    } else if (algorithm == Algorithm::kExhaustive) {
      out.sets.push_back(exhaustive_gen(ctx, out.sets.back(), real, k));
    } else if (algorithm == Algorithm::kGreedy) {
      out.sets.push_back(greedy_gen(ctx, out.sets.back(), real, k));
    } else {
      auto result = rdg_gen(ctx, out.sets.back(), carried, real, k);
      carried = cfg.rdg_carry == RdgCarry::kPosterior
                    ? posterior_pair(h, out.sets.back(), carried, result.set)
                    : std::move(result.weights.next_weights);
      out.sets.push_back(std::move(result.set));
    }

    if (cfg.adaptive_adversary) h = h.with_extra_queries(out.sets.back().cells());
  }

  double cell_sum = 0.0;
  for (const auto& s : out.sets) cell_sum += normalized_cell_entropy(h, s);
  out.cell_entropy = cell_sum / static_cast<double>(out.sets.size());
  out.transition_entropy = transition_entropy_trajectory(h, out.sets);
  out.protection_rate = protection_rate(viterbi_attack(h, out.sets), out.truth);
  return out;
}

namespace {

struct Task {
  Algorithm algorithm;
  std::size_t k;
  std::size_t length;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const HistoryModel& base) {
  cfg.validate();
  const HistoryModel h =
      base.with_smoothing(cfg.laplace_alpha).with_zero_row_policy(cfg.zero_row_policy);

  std::vector<Task> tasks;
  for (auto algorithm : cfg.algorithms) {
    for (auto k : cfg.k_values) {
      for (auto length : cfg.path_lengths) tasks.push_back(Task{algorithm, k, length});
    }
  }
  const std::size_t reps = cfg.repetitions;
  struct Slot {
    bool ok = false;
    double cell = 0.0, transition = 0.0, protection = 0.0;
  };
  std::vector<Slot> slots(tasks.size() * reps);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < slots.size(); i = next++) {
      const auto& task = tasks[i / reps];
      const auto rep = i % reps;
      try {
        const auto o = run_repetition(cfg, h, task.algorithm, task.k, task.length, rep);
        slots[i] = Slot{true, o.cell_entropy, o.transition_entropy, o.protection_rate};
      } catch (const Error& e) {
        std::clog << "repetition excluded (" << to_string(task.algorithm) << ", k=" << task.k
                  << ", length=" << task.length << ", rep=" << rep << "): " << e.what() << '\n';
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<ResultRow> rows;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    std::vector<double> cell, transition, protection;
    std::size_t excluded = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& s = slots[t * reps + rep];
      if (!s.ok) {
        ++excluded;
        continue;
      }
      cell.push_back(s.cell);
      transition.push_back(s.transition);
      protection.push_back(s.protection);
    }
    const auto c = summarize(cell);
    const auto tr = summarize(transition);
    const auto p = summarize(protection);
    rows.push_back(ResultRow{tasks[t].algorithm, tasks[t].k, tasks[t].length, c.mean, tr.mean,
                             p.mean, c.stddev, tr.stddev, p.stddev, cell.size(), excluded});
  }
  return rows;
}

HistoryModel load_history(const ExperimentConfig& cfg) {
  if (const auto* synth = std::get_if<SynthParams>(&cfg.history_source)) {
    return synth_history(cfg.grid, *synth, mix_seed(cfg.seed, {kHistoryTag}));
  }
  const auto& source = std::get<CorpusSource>(cfg.history_source);
  const auto records = read_corpus(source.path);
  return build_history(records, cfg.grid);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, load_history(cfg));
}

}  // namespace dummyloc
