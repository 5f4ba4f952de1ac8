// Command-line front end: PLT ingestion, benchmark runs, attack reports and
// small single-instance calculations.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dummyloc/attack.hpp"
#include "dummyloc/error.hpp"
#include "dummyloc/io.hpp"
#include "dummyloc/metrics.hpp"
#include "dummyloc/simulation.hpp"

using namespace dummyloc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> grid_n;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> threads;
  std::string corpus;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment configuration");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--grid-n", f.grid_n, "Grid side length in cells");
  cmd->add_option("--reps", f.reps, "Repetitions per (algorithm, k, length)");
  cmd->add_option("--threads", f.threads, "Worker threads");
  cmd->add_option("--corpus", f.corpus, "Binned corpus to use as history");
  cmd->add_option("--out", f.out, "Output file (default stdout)");
}

ExperimentConfig resolve_config(const CommonFlags& f) {
  auto cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.grid_n) cfg.grid.n = *f.grid_n;
  if (f.reps) cfg.repetitions = *f.reps;
  if (f.threads) cfg.threads = *f.threads;
  if (!f.corpus.empty()) cfg.history_source = CorpusSource{f.corpus};
  cfg.validate();
  return cfg;
}

HistoryModel resolve_history(const ExperimentConfig& cfg) {
  return load_history(cfg).with_smoothing(cfg.laplace_alpha).with_zero_row_policy(cfg.zero_row_policy);
}

template <typename Write>
void to_output(const std::string& path, Write write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kWriteFailed, "cannot open " + path + " for writing");
  write(out);
  out.flush();
  if (!out) throw Error(ErrorCode::kWriteFailed, "write to " + path + " failed");
}

LocationSet parse_set(const std::string& text, const GridSpec& grid) {
  std::vector<CellId> cells;
  std::stringstream s(text);
  std::string field;
  while (std::getline(s, field, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != field.size() || field.empty()) throw Error(ErrorCode::kParseError, "bad cell '" + field + "'");
    cells.push_back(CellId{static_cast<std::uint32_t>(v)});
    if (!grid.contains(cells.back())) throw Error(ErrorCode::kCellOutOfGrid, "cell " + field + " is outside the grid");
  }
  return LocationSet(cells);
}

void print_vector(std::ostream& out, const PosteriorVector& p) {
  for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " " : "") << std::setprecision(6) << p[i];
}

// The worked example: three candidate previous cells with priors 3/5, 1/5,
// 1/5 and three next cells.
int demo_worked_example() {
  HistoryModel::Builder b(GridSpec{4});
  b.add_query(CellId{0}, 3).add_query(CellId{1}, 1).add_query(CellId{2}, 1);
  const std::uint64_t rows[3][3] = {{1, 1, 1}, {1, 2, 1}, {1, 3, 0}};
  for (std::uint32_t x = 0; x < 3; ++x) {
    for (std::uint32_t y = 0; y < 3; ++y) b.add_transition(CellId{x}, CellId{4 + y}, rows[x][y]);
  }
  const auto h = b.build();
  const LocationSet prev({CellId{0}, CellId{1}, CellId{2}});
  const LocationSet next({CellId{4}, CellId{5}, CellId{6}});
  const auto priors = normalized_priors(h, prev);
  const auto post = posterior_pair(h, prev, priors, next);

  std::cout << "previous cells 0 1 2, priors ";
  print_vector(std::cout, priors);
  std::cout << "\n";
  for (std::uint32_t x = 0; x < 3; ++x) {
    std::cout << "  row " << x << " -> 4 5 6: ";
    print_vector(std::cout, transition_probabilities(h, CellId{x}, next));
    std::cout << "\n";
  }
  std::cout << "posterior over 4 5 6:";
  for (double v : post) std::cout << ' ' << std::lround(v * 20.0) << "/20";
  std::cout << "  (";
  print_vector(std::cout, post);
  std::cout << ")\ntransition entropy " << std::setprecision(6) << entropy(post) << " bits\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dummy-location generation and trajectory attack simulator"};
  app.require_subcommand(1);

  CommonFlags common;
  std::string format = "csv";

  auto* ingest = app.add_subcommand("ingest", "Bin a directory of PLT files into a corpus");
  std::string plt_root;
  std::optional<double> origin_lat, origin_lon, cell_size;
  BinningOptions binning;
  ingest->add_option("plt_dir", plt_root, "Directory searched recursively for *.plt")->required();
  ingest->add_option("--config", common.config, "JSON configuration supplying the grid");
  ingest->add_option("--grid-n", common.grid_n, "Grid side length in cells");
  ingest->add_option("--origin-lat", origin_lat, "Latitude of the south-west corner");
  ingest->add_option("--origin-lon", origin_lon, "Longitude of the south-west corner");
  ingest->add_option("--cell-size-km", cell_size, "Cell edge length in km");
  ingest->add_option("--max-gap", binning.max_gap_seconds, "Seconds of silence that split a record");
  ingest->add_option("--min-dwell", binning.min_dwell_seconds, "Drop cell visits shorter than this");
  ingest->add_option("--out", common.out, "Corpus file (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Run the benchmark and emit result rows");
  add_common(simulate, common);
  simulate->add_option("--format", format, "csv or long")->check(CLI::IsMember({"csv", "long"}));

  auto* attack = app.add_subcommand("attack", "Report Viterbi protection rates");
  add_common(attack, common);
  std::size_t attack_length = 8;
  std::vector<std::size_t> attack_k;
  attack->add_option("--length", attack_length, "Trajectory length");
  attack->add_option("--k", attack_k, "k values (default from the configuration)");

  auto* metrics = app.add_subcommand("metrics", "Entropies for a sequence of location sets");
  add_common(metrics, common);
  std::vector<std::string> set_texts;
  metrics->add_option("--set", set_texts, "Comma-separated cell ids; repeat once per step")->required();

  app.add_subcommand("demo-fig4", "Print the three-cell posterior worked example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand("demo-fig4")) return demo_worked_example();

    if (*ingest) {
      GridSpec grid = common.config.empty() ? GridSpec{} : load_config(common.config).grid;
      if (common.grid_n) grid.n = *common.grid_n;
      if (origin_lat) grid.origin_lat = *origin_lat;
      if (origin_lon) grid.origin_lon = *origin_lon;
      if (cell_size) grid.cell_size_km = *cell_size;
      if (common.config.empty() && !(origin_lat && origin_lon)) {
        std::cerr << "ingest needs the grid's corner: pass --origin-lat/--origin-lon or --config\n";
        return kExitUsage;
      }
      std::size_t warnings = 0;
      const auto tracks = load_plt_tree(plt_root, &warnings);
      const auto records = bin_trajectories(tracks, grid, binning);
      to_output(common.out, [&](std::ostream& out) { write_corpus(out, records); });
      std::cerr << tracks.size() << " files, " << records.size() << " records, " << warnings
                << " malformed lines skipped\n";
      return 0;
    }

    const auto cfg = resolve_config(common);

    if (*simulate) {
      const auto rows = run_experiment(cfg);
      const auto fmt = *parse_result_format(format);
      to_output(common.out, [&](std::ostream& out) { emit_results(out, rows, fmt); });
      return 0;
    }

    if (*attack) {
      auto run = cfg;
      run.path_lengths = {attack_length};
      if (!attack_k.empty()) run.k_values = attack_k;
      run.validate();
      const auto rows = run_experiment(run);
      to_output(common.out, [&](std::ostream& out) {
        out << "algorithm,k,path_length,mean_protection_rate,stddev_protection_rate,repetitions,excluded\n";
        for (const auto& r : rows) {
          out << to_string(r.algorithm) << ',' << r.k << ',' << r.path_length << ','
              << std::setprecision(6) << r.mean_protection_rate << ',' << r.stddev_protection_rate << ','
              << r.repetitions << ',' << r.excluded << '\n';
        }
      });
      return 0;
    }

    if (*metrics) {
      const auto h = resolve_history(cfg);
      std::vector<LocationSet> steps;
      for (const auto& t : set_texts) steps.push_back(parse_set(t, cfg.grid));
      to_output(common.out, [&](std::ostream& out) {
        out << std::setprecision(6);
        for (std::size_t j = 0; j < steps.size(); ++j) {
          out << "step " << j << ": cell_entropy " << cell_entropy(h, steps[j]) << " normalized "
              << normalized_cell_entropy(h, steps[j]) << "\n";
        }
        const auto post = posterior_trajectory(h, steps);
        out << "posterior ";
        print_vector(out, post);
        out << "\ntransition_entropy " << entropy(post) << "\n";
        const auto path = viterbi_attack(h, steps).estimated;
        out << "viterbi_path";
        for (auto c : path) out << ' ' << c.index;
        out << "\n";
      });
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
