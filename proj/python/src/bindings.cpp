#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>
#include <tuple>

#include "dummyloc/attack.hpp"
#include "dummyloc/error.hpp"
#include "dummyloc/generators.hpp"
#include "dummyloc/io.hpp"
#include "dummyloc/metrics.hpp"
#include "dummyloc/simulation.hpp"

namespace py = pybind11;
using namespace dummyloc;

namespace {

std::vector<CellId> to_cells(const std::vector<std::uint32_t>& ids) {
  std::vector<CellId> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(CellId{i});
  return out;
}

std::vector<std::uint32_t> to_ids(std::span<const CellId> cells) {
  std::vector<std::uint32_t> out;
  out.reserve(cells.size());
  for (auto c : cells) out.push_back(c.index);
  return out;
}

GeneratorContext context(const HistoryModel& h, std::uint64_t seed, std::size_t pool_multiplier,
                         std::size_t subset_cap) {
  GeneratorContext ctx(h, seed);
  ctx.pool_multiplier = pool_multiplier;
  ctx.exhaustive_subset_cap = subset_cap;
  return ctx;
}

py::dict row_to_dict(const ResultRow& r) {
  py::dict d;
  d["algorithm"] = std::string(to_string(r.algorithm));
  d["k"] = r.k;
  d["path_length"] = r.path_length;
  d["mean_cell_entropy"] = r.mean_cell_entropy;
  d["mean_transition_entropy"] = r.mean_transition_entropy;
  d["mean_protection_rate"] = r.mean_protection_rate;
  d["stddev_cell_entropy"] = r.stddev_cell_entropy;
  d["stddev_transition_entropy"] = r.stddev_transition_entropy;
  d["stddev_protection_rate"] = r.stddev_protection_rate;
  d["repetitions"] = r.repetitions;
  d["excluded"] = r.excluded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dummy-location generation, entropy metrics and the Viterbi trajectory attack";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init([](std::uint32_t n, double origin_lat, double origin_lon, double cell_size_km) {
             GridSpec g{n, origin_lat, origin_lon, cell_size_km};
             g.validate();
             return g;
           }),
           py::arg("n") = 100, py::arg("origin_lat") = 0.0, py::arg("origin_lon") = 0.0,
           py::arg("cell_size_km") = 0.01)
      .def_readonly("n", &GridSpec::n)
      .def_readonly("origin_lat", &GridSpec::origin_lat)
      .def_readonly("origin_lon", &GridSpec::origin_lon)
      .def_readonly("cell_size_km", &GridSpec::cell_size_km)
      .def_property_readonly("cell_count", &GridSpec::cell_count)
      .def("locate", [](const GridSpec& g, double lat, double lon) -> std::optional<std::uint32_t> {
        const auto c = locate(g, lat, lon);
        return c ? std::optional<std::uint32_t>(c->index) : std::nullopt;
      });

  py::enum_<ZeroRowPolicy>(m, "ZeroRowPolicy")
      .value("UNIFORM", ZeroRowPolicy::kUniform)
      .value("NO_EVIDENCE", ZeroRowPolicy::kNoEvidence);

  py::class_<HistoryModel>(m, "HistoryModel")
      .def_static(
          "from_counts",
          [](const GridSpec& grid, const std::map<std::uint32_t, std::uint64_t>& queries,
             const std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint64_t>>& transitions) {
            HistoryModel::Builder b(grid);
            for (const auto& [cell, count] : queries) b.add_query(CellId{cell}, count);
            for (const auto& [from, to, count] : transitions) b.add_transition(CellId{from}, CellId{to}, count);
            return b.build();
          },
          py::arg("grid"), py::arg("queries"), py::arg("transitions"),
          "Build from {cell: query_count} and [(from, to, count)].")
      .def_static(
          "from_trajectories",
          [](const GridSpec& grid, const std::vector<std::vector<std::uint32_t>>& paths) {
            std::vector<TrajectoryRecord> records;
            for (const auto& p : paths) records.push_back(TrajectoryRecord{"", to_cells(p)});
            return build_history(records, grid);
          },
          py::arg("grid"), py::arg("trajectories"))
      .def_static(
          "synthetic",
          [](const GridSpec& grid, std::uint64_t seed, double skew, double locality, std::uint32_t radius,
             std::uint64_t queries_per_cell, std::size_t walks, std::size_t walk_length) {
            return synth_history(grid, SynthParams{skew, locality, radius, queries_per_cell, walks, walk_length},
                                 seed);
          },
          py::arg("grid"), py::arg("seed") = 1, py::arg("skew") = 1.0, py::arg("locality") = 1.0,
          py::arg("radius") = 3, py::arg("queries_per_cell") = 20, py::arg("walks") = 5000,
          py::arg("walk_length") = 20)
      .def_property_readonly("grid", &HistoryModel::grid)
      .def_property_readonly("total_queries", &HistoryModel::total_queries)
      .def_property_readonly("transition_pairs", &HistoryModel::transition_pairs)
      .def("query_count", [](const HistoryModel& h, std::uint32_t c) { return h.query_count(CellId{c}); })
      .def("transition_count",
           [](const HistoryModel& h, std::uint32_t a, std::uint32_t b) {
             return h.transition_count(CellId{a}, CellId{b});
           })
      .def("with_smoothing", &HistoryModel::with_smoothing, py::arg("alpha"))
      .def("with_zero_row_policy", &HistoryModel::with_zero_row_policy, py::arg("policy"))
      .def_property_readonly("zero_row_policy", &HistoryModel::zero_row_policy);

  py::class_<LocationSet>(m, "LocationSet")
      .def(py::init([](const std::vector<std::uint32_t>& cells, std::size_t real_index) {
             return LocationSet(to_cells(cells), real_index);
           }),
           py::arg("cells"), py::arg("real_index") = 0)
      .def_property_readonly("cells", [](const LocationSet& s) { return to_ids(s.cells()); })
      .def_property_readonly("real_index", &LocationSet::real_index)
      .def_property_readonly("real", [](const LocationSet& s) { return s.real().index; })
      .def_property_readonly("k", &LocationSet::k)
      .def("__len__", &LocationSet::k)
      .def("__eq__", [](const LocationSet& a, const LocationSet& b) { return a == b; })
      .def("__repr__", [](const LocationSet& s) {
        std::ostringstream out;
        out << "LocationSet([";
        for (std::size_t i = 0; i < s.k(); ++i) out << (i ? ", " : "") << s[i].index;
        out << "], real_index=" << s.real_index() << ")";
        return out.str();
      });

  m.def("entropy", [](const std::vector<double>& p) { return entropy(p); }, py::arg("p"));
  m.def("query_probability", [](const HistoryModel& h, std::uint32_t c) { return query_probability(h, CellId{c}); });
  m.def("normalized_priors", &normalized_priors, py::arg("history"), py::arg("location_set"));
  m.def("transition_probabilities",
        [](const HistoryModel& h, std::uint32_t from, const LocationSet& next) {
          return transition_probabilities(h, CellId{from}, next);
        },
        py::arg("history"), py::arg("from_cell"), py::arg("next_set"));
  m.def("cell_entropy", &cell_entropy, py::arg("history"), py::arg("location_set"));
  m.def("normalized_cell_entropy", &normalized_cell_entropy, py::arg("history"), py::arg("location_set"));
  m.def("posterior_pair",
        [](const HistoryModel& h, const LocationSet& prev, const std::vector<double>& w, const LocationSet& next) {
          return posterior_pair(h, prev, w, next);
        },
        py::arg("history"), py::arg("prev"), py::arg("prev_weights"),
        py::arg("next"));
  m.def("transition_entropy_pair", &transition_entropy_pair, py::arg("history"), py::arg("prev"), py::arg("next"));
  m.def("posterior_trajectory",
        [](const HistoryModel& h, const std::vector<LocationSet>& steps) { return posterior_trajectory(h, steps); },
        py::arg("history"), py::arg("steps"));
  m.def("transition_entropy_trajectory",
        [](const HistoryModel& h, const std::vector<LocationSet>& steps) {
          return transition_entropy_trajectory(h, steps);
        },
        py::arg("history"), py::arg("steps"));

  m.def("random_gen",
        [](const HistoryModel& h, std::uint32_t real, std::size_t k, std::uint64_t seed) {
          return random_gen(GeneratorContext(h, seed), CellId{real}, k);
        },
        py::arg("history"), py::arg("real"), py::arg("k"), py::arg("seed") = 0);
  m.def("dls_gen",
        [](const HistoryModel& h, std::uint32_t real, std::size_t k, std::uint64_t seed) {
          return dls_gen(GeneratorContext(h, seed), CellId{real}, k);
        },
        py::arg("history"), py::arg("real"), py::arg("k"), py::arg("seed") = 0);
  m.def("exhaustive_gen",
        [](const HistoryModel& h, const LocationSet& prev, std::uint32_t real, std::size_t k, std::uint64_t seed,
           std::size_t pool_multiplier, std::size_t subset_cap) {
          return exhaustive_gen(context(h, seed, pool_multiplier, subset_cap), prev, CellId{real}, k);
        },
        py::arg("history"), py::arg("prev"), py::arg("real"), py::arg("k"), py::arg("seed") = 0,
        py::arg("pool_multiplier") = 4, py::arg("subset_cap") = 1000);
  m.def("greedy_gen",
        [](const HistoryModel& h, const LocationSet& prev, std::uint32_t real, std::size_t k,
           std::size_t pool_multiplier) {
          return greedy_gen(context(h, 0, pool_multiplier, 1000), prev, CellId{real}, k);
        },
        py::arg("history"), py::arg("prev"), py::arg("real"), py::arg("k"), py::arg("pool_multiplier") = 4);
  m.def("rdg_gen",
        [](const HistoryModel& h, const LocationSet& prev, const std::vector<double>& prev_posterior,
           std::uint32_t real, std::size_t k, std::size_t pool_multiplier) {
          auto r = rdg_gen(context(h, 0, pool_multiplier, 1000), prev, prev_posterior, CellId{real}, k);
          return py::make_tuple(r.set, r.weights.next_weights);
        },
        py::arg("history"), py::arg("prev"), py::arg("prev_posterior"), py::arg("real"), py::arg("k"),
        py::arg("pool_multiplier") = 4, "Returns (set, normalized max-product weights of the set).");
  m.def("max_product_weights",
        [](const HistoryModel& h, const LocationSet& prev, const std::vector<double>& w, const LocationSet& next) {
          return max_product_weights(h, prev, w, next);
        },
        py::arg("history"), py::arg("prev"), py::arg("prev_weights"),
        py::arg("next"));

  m.def("viterbi_attack",
        [](const HistoryModel& h, const std::vector<LocationSet>& steps, bool log_space) {
          const auto r = viterbi_attack(h, steps, ViterbiOptions{log_space});
          return py::make_tuple(to_ids(r.estimated), log_space ? r.log_path_score : r.path_score);
        },
        py::arg("history"), py::arg("steps"), py::arg("log_space") = false,
        "Returns (path, score); the score is a natural log when log_space is set.");
  m.def("brute_force_path",
        [](const HistoryModel& h, const std::vector<LocationSet>& steps) {
          const auto r = brute_force_path(h, steps);
          return py::make_tuple(to_ids(r.estimated), r.path_score);
        },
        py::arg("history"), py::arg("steps"));
  m.def("protection_rate",
        [](const std::vector<std::uint32_t>& estimated, const std::vector<std::uint32_t>& truth) {
          AttackResult r;
          r.estimated = to_cells(estimated);
          return protection_rate(r, to_cells(truth));
        },
        py::arg("estimated"), py::arg("truth"));

  m.def("default_config", [] { return config_to_json(ExperimentConfig{}); }, "Default configuration as JSON.");
  m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
        py::arg("config_json"));
  m.def("run_experiment",
        [](const std::string& text) {
          const auto cfg = parse_config(text);
          std::vector<ResultRow> rows;
          {
            py::gil_scoped_release release;
            rows = run_experiment(cfg);
          }
          py::list out;
          for (const auto& r : rows) out.append(row_to_dict(r));
          return out;
        },
        py::arg("config_json"), "Run a benchmark described by a JSON configuration; one dict per result row.");
  m.def("results_csv",
        [](const std::string& text, const std::string& format) {
          const auto fmt = parse_result_format(format);
          if (!fmt) throw Error(ErrorCode::kInvalidArgument, "format must be csv or long");
          std::vector<ResultRow> rows;
          {
            py::gil_scoped_release release;
            rows = run_experiment(parse_config(text));
          }
          std::ostringstream out;
          emit_results(out, rows, *fmt);
          return out.str();
        },
        py::arg("config_json"), py::arg("format") = "csv");

  m.def("parse_plt",
        [](const std::string& path) {
          const auto r = parse_plt(path);
          py::list records;
          for (const auto& g : r.records) {
            records.append(py::make_tuple(g.latitude, g.longitude, g.altitude_ft, g.days, g.date, g.time));
          }
          return py::make_tuple(records, r.warnings);
        },
        py::arg("path"), "Returns ([(lat, lon, altitude_ft, days, date, time)], warnings).");
  m.def("read_corpus",
        [](const std::string& path) {
          py::list out;
          for (const auto& r : read_corpus(path)) out.append(py::make_tuple(r.user_id, to_ids(r.cells)));
          return out;
        },
        py::arg("path"));
}
