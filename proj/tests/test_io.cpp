#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dummyloc/error.hpp"
#include "dummyloc/io.hpp"

using namespace dummyloc;
namespace fs = std::filesystem;

namespace {

const std::string kHeader =
    "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n0,2,255,My Track,0,0,2,8421376\n0\n";

std::string plt_line(double lat, double lon, double days) {
  std::ostringstream s;
  s.precision(17);
  s << lat << ',' << lon << ",0,492," << days << ",2008-10-23,02:53:04\n";
  return s.str();
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("dummyloc_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                 ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Grid anchored at (0, 0) so one cell spans exactly 0.01 degrees each way.
GridSpec degree_grid() { return GridSpec{10, 0.0, 0.0, 1.1132}; }

GpsRecord point(double lat, double lon, double seconds) {
  GpsRecord r;
  r.latitude = lat;
  r.longitude = lon;
  r.days = 40000.0 + seconds / 86400.0;
  return r;
}

GpsTrack fixture_track() {
  return GpsTrack{"007",
                  {point(0.005, 0.005, 0), point(0.006, 0.004, 60), point(0.015, 0.005, 120),
                   point(0.015, 0.025, 180), point(0.5, 0.5, 240), point(0.035, 0.025, 300),
                   point(0.035, 0.025, 300 + 30 * 60), point(0.045, 0.025, 360 + 30 * 60)}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DUMMYLOC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ParsePlt, HeaderOnlyIsEmpty) {
  std::istringstream in(kHeader);
  const auto r = parse_plt(in);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.warnings, 0u);
}

TEST(ParsePlt, OneRecord) {
  std::istringstream in(kHeader + "39.984702,116.318417,0,492,39744.1201851852,2008-10-23,02:53:04\r\n");
  const auto r = parse_plt(in);
  ASSERT_EQ(r.records.size(), 1u);
  const auto& g = r.records[0];
  EXPECT_EQ(g.latitude, 39.984702);
  EXPECT_EQ(g.longitude, 116.318417);
  EXPECT_EQ(g.altitude_ft, 492.0);
  EXPECT_EQ(g.days, 39744.1201851852);
  EXPECT_EQ(g.date, "2008-10-23");
  EXPECT_EQ(g.time, "02:53:04");
}

TEST(ParsePlt, CorruptLinesAreCounted) {
  const std::vector<std::string> bad{"garbage",
                                     "39.9,116.3,0,492,39744.1,2008-10-23",
                                     "95.0,116.3,0,492,39744.1,2008-10-23,02:53:04",
                                     "39.9,196.3,0,492,39744.1,2008-10-23,02:53:04",
                                     "39.9,116.3,x,492,39744.1,2008-10-23,02:53:04",
                                     "39.9,116.3,0,492,39744.1,2008/10/23,02:53:04",
                                     "39.9,116.3,0,492,39744.1,2008-10-23,2:53:04",
                                     "39.9,,0,492,39744.1,2008-10-23,02:53:04",
                                     "39.9,116.3,0,492,39744.1,2008-10-23,02:53:04,extra",
                                     "lat,lon,0,alt,days,date,time"};
  std::string text = kHeader;
  for (int i = 0; i < 1000; ++i) {
    text += (i % 100 == 50) ? bad[static_cast<std::size_t>(i / 100)] + "\n" : plt_line(39.9 + i * 1e-5, 116.3, 39744.0 + i * 1e-4);
  }
  std::istringstream in(text);
  const auto r = parse_plt(in);
  EXPECT_EQ(r.records.size(), 990u);
  EXPECT_EQ(r.warnings, 10u);
}

TEST(ParsePlt, ShortHeaderThrows) {
  std::istringstream in("a\nb\nc\n");
  try {
    parse_plt(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kHeaderTooShort);
  }
}

TEST(ParsePlt, MissingFileThrows) {
  try {
    parse_plt(std::string("/nonexistent/dir/file.plt"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFileUnreadable);
  }
}

TEST(Locate, CellsAndBox) {
  const auto g = degree_grid();
  EXPECT_EQ(locate(g, 0.005, 0.005), CellId{0});
  EXPECT_EQ(locate(g, 0.015, 0.025), CellId{12});
  EXPECT_EQ(locate(g, 0.095, 0.095), CellId{99});
  EXPECT_FALSE(locate(g, -0.001, 0.005).has_value());
  EXPECT_FALSE(locate(g, 0.105, 0.005).has_value());
}

TEST(BinTrajectories, AllOutsideIsEmpty) {
  const GpsTrack t{"a", {point(1.0, 1.0, 0), point(-1.0, 0.5, 60)}};
  EXPECT_TRUE(bin_trajectories({t}, degree_grid()).empty());
}

TEST(BinTrajectories, OneBoundaryCrossing) {
  const GpsTrack t{"a", {point(0.005, 0.005, 0), point(0.005, 0.008, 30), point(0.005, 0.012, 60)}};
  const auto out = bin_trajectories({t}, degree_grid());
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].cells, (std::vector<CellId>{CellId{0}, CellId{1}}));
}

TEST(BinTrajectories, HandBinnedFixture) {
  const auto out = bin_trajectories({fixture_track()}, degree_grid());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].user_id, "007");
  EXPECT_EQ(out[0].cells, (std::vector<CellId>{CellId{0}, CellId{10}, CellId{12}, CellId{32}}));
  EXPECT_EQ(out[1].cells, (std::vector<CellId>{CellId{32}, CellId{42}}));
}

TEST(BinTrajectories, MinDwellDropsShortVisits) {
  BinningOptions opt;
  opt.min_dwell_seconds = 30;
  const auto out = bin_trajectories({fixture_track()}, degree_grid(), opt);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].cells, std::vector<CellId>{CellId{0}});
}

TEST(LoadPltTree, UserFromDirectory) {
  TempDir dir;
  fs::create_directories(dir / "Data/003/Trajectory");
  std::ofstream(dir / "Data/003/Trajectory/20081023025304.plt")
      << kHeader << plt_line(0.005, 0.005, 40000.0) << plt_line(0.015, 0.005, 40000.001) << "bad\n";
  std::size_t warnings = 0;
  const auto tracks = load_plt_tree(dir.path().string(), &warnings);
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_EQ(tracks[0].user_id, "003");
  EXPECT_EQ(tracks[0].points.size(), 2u);
  EXPECT_EQ(warnings, 1u);
  const auto binned = bin_trajectories(tracks, degree_grid());
  ASSERT_EQ(binned.size(), 1u);
  EXPECT_EQ(binned[0].cells, (std::vector<CellId>{CellId{0}, CellId{10}}));
}

TEST(Corpus, RoundTrip) {
  const std::vector<TrajectoryRecord> records{
      {"000", {CellId{1}, CellId{2}, CellId{3}}}, {"001", {CellId{99}}}, {"x y", {CellId{0}, CellId{5}}}};
  std::ostringstream out;
  write_corpus(out, records);
  EXPECT_EQ(out.str(), "000\t1,2,3\n001\t99\nx y\t0,5\n");
  std::istringstream in(out.str());
  const auto back = read_corpus(in);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].user_id, records[i].user_id);
    EXPECT_EQ(back[i].cells, records[i].cells);
  }
}

TEST(Corpus, MalformedLinesThrow) {
  std::istringstream no_tab("user 1,2\n");
  EXPECT_THROW(read_corpus(no_tab), Error);
  std::istringstream bad_cell("user\t1,b\n");
  EXPECT_THROW(read_corpus(bad_cell), Error);
}

TEST(EmitResults, EmptyRowsGiveHeaderOnly) {
  std::ostringstream out;
  emit_results(out, {}, ResultFormat::kCsv);
  EXPECT_EQ(out.str(), std::string(kResultsHeader) + "\n");
}

TEST(EmitResults, OneRowInDeclaredOrder) {
  ResultRow r;
  r.algorithm = Algorithm::kGreedy;
  r.k = 10;
  r.path_length = 3;
  r.mean_cell_entropy = 3.25;
  r.mean_transition_entropy = 2.5;
  r.mean_protection_rate = 0.125;
  r.stddev_cell_entropy = 0.5;
  r.stddev_transition_entropy = 0.75;
  r.stddev_protection_rate = 0.0625;
  r.repetitions = 299;
  r.excluded = 1;
  std::ostringstream out;
  emit_results(out, {r}, ResultFormat::kCsv);
  EXPECT_EQ(out.str(), std::string(kResultsHeader) + "\ngreedy,10,3,3.25,2.5,0.125,0.5,0.75,0.0625,299,1\n");
  std::ostringstream wide;
  emit_results(wide, {r}, ResultFormat::kLong);
  EXPECT_EQ(wide.str(), std::string(kLongHeader) +
                            "\ngreedy,10,3,cell_entropy,3.25,0.5,299\n"
                            "greedy,10,3,transition_entropy,2.5,0.75,299\n"
                            "greedy,10,3,protection_rate,0.125,0.0625,299\n");
}

TEST(EmitResults, BenchmarkRoundTrip) {
  ExperimentConfig cfg;
  cfg.grid = GridSpec{10};
  SynthParams p;
  p.walks = 200;
  cfg.history_source = p;
  cfg.k_values = {3, 6};
  cfg.path_lengths = {2, 3};
  cfg.repetitions = 5;
  const auto rows = run_experiment(cfg);
  std::ostringstream out;
  emit_results(out, rows, ResultFormat::kCsv);
  std::istringstream in(out.str());
  EXPECT_EQ(read_results(in), rows);
  std::ostringstream again;
  emit_results(again, run_experiment(cfg), ResultFormat::kCsv);
  EXPECT_EQ(out.str(), again.str());
}

TEST(EmitResults, UnwritablePathThrows) {
  try {
    emit_results({}, ResultFormat::kCsv, "/nonexistent/dir/out.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWriteFailed);
  }
}

TEST(Config, EmptyObjectGivesDefaults) {
  EXPECT_EQ(config_to_json(parse_config("{}")), config_to_json(ExperimentConfig{}));
}

TEST(Config, ParsesFields) {
  const auto cfg = parse_config(R"({
    "grid": {"n": 30, "origin_lat": 39.9, "origin_lon": 116.3, "cell_size_km": 0.01},
    "history": {"source": "synthetic", "skew": 0.5, "locality": "inf", "walks": 100},
    "k_values": [2, 4], "path_lengths": [2], "repetitions": 7,
    "algorithms": ["dls", "rdg"], "seed": 9, "rdg_carry": "max_product",
    "zero_row_policy": "uniform"})");
  EXPECT_EQ(cfg.grid.n, 30u);
  EXPECT_EQ(cfg.grid.origin_lat, 39.9);
  const auto& p = std::get<SynthParams>(cfg.history_source);
  EXPECT_EQ(p.skew, 0.5);
  EXPECT_TRUE(std::isinf(p.locality));
  EXPECT_EQ(p.walks, 100u);
  EXPECT_EQ(cfg.k_values, (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(cfg.repetitions, 7u);
  EXPECT_EQ(cfg.algorithms, (std::vector<Algorithm>{Algorithm::kDls, Algorithm::kRdg}));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.rdg_carry, RdgCarry::kMaxProduct);
  EXPECT_EQ(cfg.zero_row_policy, ZeroRowPolicy::kUniform);
}

TEST(Config, RoundTrips) {
  auto cfg = parse_config(R"({"history": {"source": "corpus", "path": "corpus.tsv"}, "threads": 3})");
  EXPECT_EQ(std::get<CorpusSource>(cfg.history_source).path, "corpus.tsv");
  const auto text = config_to_json(cfg);
  EXPECT_EQ(config_to_json(parse_config(text)), text);
}

TEST(Config, RejectsBadInput) {
  for (const char* text : {R"({"grid_size": 3})", R"({"grid": {"m": 3}})", R"({"algorithms": ["viterbi"]})",
                           R"({"k_values": [1]})", R"({"rdg_carry": "sum"})", "[1, 2]", "{not json"}) {
    try {
      parse_config(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kParseError || e.code() == ErrorCode::kInvalidArgument) << text;
    }
  }
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run_cli("demo-fig4"), 0);
  EXPECT_EQ(run_cli("--no-such-flag"), 1);
  EXPECT_EQ(run_cli("simulate --config " + (dir / "missing.json").string()), 2);
  std::ofstream(dir / "bad.json") << R"({"unknown": 1})";
  EXPECT_EQ(run_cli("simulate --config " + (dir / "bad.json").string()), 2);
  std::ofstream(dir / "tiny.json") << R"({"grid": {"n": 8}, "history": {"walks": 100}, "k_values": [3],
      "path_lengths": [2], "repetitions": 3, "algorithms": ["dls", "greedy"]})";
  const auto out = dir / "out.csv";
  EXPECT_EQ(run_cli("simulate --config " + (dir / "tiny.json").string() + " --out " + out.string()), 0);
  const auto rows = read_results(out.string());
  EXPECT_EQ(rows.size(), 2u);
}
