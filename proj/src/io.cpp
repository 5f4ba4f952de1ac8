#include "dummyloc/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dummyloc/error.hpp"

namespace dummyloc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kKmPerDegree = 111.32;
constexpr double kPi = 3.14159265358979323846;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end && !s.empty();
}

bool digits_at(std::string_view s, std::initializer_list<std::size_t> positions) {
  return std::all_of(positions.begin(), positions.end(),
                     [&](std::size_t i) { return s[i] >= '0' && s[i] <= '9'; });
}

bool valid_date(std::string_view s) {
  return s.size() == 10 && s[4] == '-' && s[7] == '-' && digits_at(s, {0, 1, 2, 3, 5, 6, 8, 9});
}

bool valid_time(std::string_view s) {
  return s.size() == 8 && s[2] == ':' && s[5] == ':' && digits_at(s, {0, 1, 3, 4, 6, 7});
}

std::optional<GpsRecord> parse_plt_line(std::string_view line) {
  const auto f = split(trim_cr(line), ',');
  if (f.size() != 7) return std::nullopt;
  GpsRecord r;
  int zero = 0;
  if (!parse_number(f[0], r.latitude) || !parse_number(f[1], r.longitude) ||
      !parse_number(f[2], zero) || !parse_number(f[3], r.altitude_ft) ||
      !parse_number(f[4], r.days) || !valid_date(f[5]) || !valid_time(f[6])) {
    return std::nullopt;
  }
  if (r.latitude < -90.0 || r.latitude > 90.0 || r.longitude < -180.0 || r.longitude > 180.0) {
    return std::nullopt;
  }
  r.date = std::string(f[5]);
  r.time = std::string(f[6]);
  return r;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kWriteFailed, "cannot open " + path + " for writing");
  return out;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  return in;
}

void finish_write(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kWriteFailed, "write to " + path + " failed");
}

}  // namespace

// --- PLT -------------------------------------------------------------------

PltParse parse_plt(std::istream& in) {
  std::string line;
  for (int i = 0; i < 6; ++i) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::kHeaderTooShort, "PLT header has " + std::to_string(i) + " of 6 lines");
    }
  }
  PltParse result;
  while (std::getline(in, line)) {
    if (trim_cr(line).empty()) continue;
    if (auto r = parse_plt_line(line)) {
      result.records.push_back(std::move(*r));
    } else {
      ++result.warnings;
    }
  }
  return result;
}

PltParse parse_plt(const std::string& path) {
  auto in = open_for_read(path);
  return parse_plt(in);
}

std::optional<CellId> locate(const GridSpec& grid, double latitude, double longitude) {
  const double north_km = (latitude - grid.origin_lat) * kKmPerDegree;
  const double east_km =
      (longitude - grid.origin_lon) * kKmPerDegree * std::cos(grid.origin_lat * kPi / 180.0);
  const double row = std::floor(north_km / grid.cell_size_km);
  const double col = std::floor(east_km / grid.cell_size_km);
  if (!(row >= 0.0 && col >= 0.0 && row < grid.n && col < grid.n)) return std::nullopt;
  return grid.at(static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col));
}

std::vector<TrajectoryRecord> bin_trajectories(const std::vector<GpsTrack>& tracks,
                                               const GridSpec& grid, const BinningOptions& options) {
  grid.validate();
  struct Visit {
    CellId cell;
    double first = 0.0;
    double last = 0.0;
  };
  std::vector<TrajectoryRecord> out;
  const auto flush = [&](const std::string& user, std::vector<Visit>& visits) {
    TrajectoryRecord record{user, {}};
    for (const auto& v : visits) {
      if (options.min_dwell_seconds > 0.0 && v.last - v.first < options.min_dwell_seconds) continue;
      if (record.cells.empty() || record.cells.back() != v.cell) record.cells.push_back(v.cell);
    }
    if (!record.cells.empty()) out.push_back(std::move(record));
    visits.clear();
  };

  for (const auto& track : tracks) {
    std::vector<Visit> visits;
    std::optional<double> last_time;
    for (const auto& p : track.points) {
      const auto cell = locate(grid, p.latitude, p.longitude);
      if (!cell) continue;
      const double t = p.seconds();
      if (last_time && t - *last_time > options.max_gap_seconds) flush(track.user_id, visits);
      last_time = t;
      if (!visits.empty() && visits.back().cell == *cell) {
        visits.back().last = t;
      } else {
        visits.push_back(Visit{*cell, t, t});
      }
    }
    flush(track.user_id, visits);
  }
  return out;
}

std::vector<GpsTrack> load_plt_tree(const std::string& root, std::size_t* warnings) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::kFileUnreadable, root + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".plt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<GpsTrack> tracks;
  for (const auto& file : files) {
    auto parent = file.parent_path();
    const auto user = parent.filename() == "Trajectory" ? parent.parent_path().filename().string()
                                                        : parent.filename().string();
    auto parsed = parse_plt(file.string());
    if (warnings) *warnings += parsed.warnings;
    tracks.push_back(GpsTrack{user, std::move(parsed.records)});
  }
  return tracks;
}

// --- corpus ----------------------------------------------------------------

void write_corpus(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  for (const auto& r : records) {
    if (r.user_id.find_first_of("\t\n") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "user id may not contain tabs or newlines");
    }
    out << r.user_id << '\t';
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
      if (i) out << ',';
      out << r.cells[i].index;
    }
    out << '\n';
  }
}

void write_corpus(const std::string& path, const std::vector<TrajectoryRecord>& records) {
  auto out = open_for_write(path);
  write_corpus(out, records);
  finish_write(out, path);
}

std::vector<TrajectoryRecord> read_corpus(std::istream& in) {
  std::vector<TrajectoryRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto tab = text.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::kParseError, "corpus line " + std::to_string(line_no) + " has no tab");
    }
    TrajectoryRecord r{std::string(text.substr(0, tab)), {}};
    const auto cells = text.substr(tab + 1);
    if (!cells.empty()) {
      for (auto field : split(cells, ',')) {
        std::uint32_t index = 0;
        if (!parse_number(field, index)) {
          throw Error(ErrorCode::kParseError,
                      "corpus line " + std::to_string(line_no) + ": bad cell '" + std::string(field) + "'");
        }
        r.cells.push_back(CellId{index});
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<TrajectoryRecord> read_corpus(const std::string& path) {
  auto in = open_for_read(path);
  return read_corpus(in);
}

// --- results ---------------------------------------------------------------

std::optional<ResultFormat> parse_result_format(std::string_view name) {
  if (name == "csv") return ResultFormat::kCsv;
  if (name == "long") return ResultFormat::kLong;
  return std::nullopt;
}

void emit_results(std::ostream& out, const std::vector<ResultRow>& rows, ResultFormat format) {
  if (format == ResultFormat::kCsv) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
      out << to_string(r.algorithm) << ',' << r.k << ',' << r.path_length << ','
          << format_double(r.mean_cell_entropy) << ',' << format_double(r.mean_transition_entropy)
          << ',' << format_double(r.mean_protection_rate) << ','
          << format_double(r.stddev_cell_entropy) << ','
          << format_double(r.stddev_transition_entropy) << ','
          << format_double(r.stddev_protection_rate) << ',' << r.repetitions << ',' << r.excluded
          << '\n';
    }
    return;
  }
  out << kLongHeader << '\n';
  for (const auto& r : rows) {
    const std::array<std::tuple<std::string_view, double, double>, 3> metrics{{
        {"cell_entropy", r.mean_cell_entropy, r.stddev_cell_entropy},
        {"transition_entropy", r.mean_transition_entropy, r.stddev_transition_entropy},
        {"protection_rate", r.mean_protection_rate, r.stddev_protection_rate},
    }};
    for (const auto& [name, mean, sd] : metrics) {
      out << to_string(r.algorithm) << ',' << r.k << ',' << r.path_length << ',' << name << ','
          << format_double(mean) << ',' << format_double(sd) << ',' << r.repetitions << '\n';
    }
  }
}

void emit_results(const std::vector<ResultRow>& rows, ResultFormat format, const std::string& path) {
  auto out = open_for_write(path);
  emit_results(out, rows, format);
  finish_write(out, path);
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != kResultsHeader) {
    throw Error(ErrorCode::kParseError, "results file lacks the expected header");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    ResultRow r;
    const auto algorithm = f.empty() ? std::nullopt : parse_algorithm(f[0]);
    const bool ok = f.size() == 11 && algorithm && parse_number(f[1], r.k) &&
                    parse_number(f[2], r.path_length) && parse_number(f[3], r.mean_cell_entropy) &&
                    parse_number(f[4], r.mean_transition_entropy) &&
                    parse_number(f[5], r.mean_protection_rate) &&
                    parse_number(f[6], r.stddev_cell_entropy) &&
                    parse_number(f[7], r.stddev_transition_entropy) &&
                    parse_number(f[8], r.stddev_protection_rate) &&
                    parse_number(f[9], r.repetitions) && parse_number(f[10], r.excluded);
    if (!ok) throw Error(ErrorCode::kParseError, "malformed results line " + std::to_string(line_no));
    r.algorithm = *algorithm;
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> read_results(const std::string& path) {
  auto in = open_for_read(path);
  return read_results(in);
}

// --- configuration ---------------------------------------------------------

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const char* where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kParseError, std::string("unknown key '") + key + "' in " + where);
    }
  }
}

double parse_locality(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::kParseError, "locality must be a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  ExperimentConfig cfg;
  try {
    const auto j = json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::kParseError, "configuration must be a JSON object");
    reject_unknown(j,
                   {"grid", "history", "k_values", "path_lengths", "repetitions", "algorithms", "seed",
                    "threads", "adaptive_adversary", "rdg_carry", "laplace_alpha", "zero_row_policy",
                    "pool_multiplier", "exhaustive_subset_cap"},
                   "configuration");
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      reject_unknown(g, {"n", "origin_lat", "origin_lon", "cell_size_km"}, "grid");
      cfg.grid.n = get_or(g, "n", cfg.grid.n);
      cfg.grid.origin_lat = get_or(g, "origin_lat", cfg.grid.origin_lat);
      cfg.grid.origin_lon = get_or(g, "origin_lon", cfg.grid.origin_lon);
      cfg.grid.cell_size_km = get_or(g, "cell_size_km", cfg.grid.cell_size_km);
    }
    if (j.contains("history")) {
      const auto& h = j.at("history");
      const auto source = get_or<std::string>(h, "source", "synthetic");
      if (source == "synthetic") {
        reject_unknown(h, {"source", "skew", "locality", "radius", "queries_per_cell", "walks", "walk_length"},
                       "history");
        SynthParams p;
        p.skew = get_or(h, "skew", p.skew);
        if (h.contains("locality")) p.locality = parse_locality(h.at("locality"));
        p.radius = get_or(h, "radius", p.radius);
        p.queries_per_cell = get_or(h, "queries_per_cell", p.queries_per_cell);
        p.walks = get_or(h, "walks", p.walks);
        p.walk_length = get_or(h, "walk_length", p.walk_length);
        cfg.history_source = p;
      } else if (source == "corpus") {
        reject_unknown(h, {"source", "path"}, "history");
        cfg.history_source = CorpusSource{h.at("path").get<std::string>()};
      } else {
        throw Error(ErrorCode::kParseError, "history.source must be \"synthetic\" or \"corpus\"");
      }
    }
    cfg.k_values = get_or(j, "k_values", cfg.k_values);
    cfg.path_lengths = get_or(j, "path_lengths", cfg.path_lengths);
    cfg.repetitions = get_or(j, "repetitions", cfg.repetitions);
    if (j.contains("algorithms")) {
      cfg.algorithms.clear();
      for (const auto& name : j.at("algorithms")) {
        const auto a = parse_algorithm(name.get<std::string>());
        if (!a) throw Error(ErrorCode::kParseError, "unknown algorithm " + name.dump());
        cfg.algorithms.push_back(*a);
      }
    }
    cfg.seed = get_or(j, "seed", cfg.seed);
    cfg.threads = get_or(j, "threads", cfg.threads);
    cfg.adaptive_adversary = get_or(j, "adaptive_adversary", cfg.adaptive_adversary);
    if (j.contains("rdg_carry")) {
      const auto carry = j.at("rdg_carry").get<std::string>();
      if (carry == "posterior") {
        cfg.rdg_carry = RdgCarry::kPosterior;
      } else if (carry == "max_product") {
        cfg.rdg_carry = RdgCarry::kMaxProduct;
      } else {
        throw Error(ErrorCode::kParseError, "rdg_carry must be \"posterior\" or \"max_product\"");
      }
    }
    cfg.laplace_alpha = get_or(j, "laplace_alpha", cfg.laplace_alpha);
    if (j.contains("zero_row_policy")) {
      const auto policy = j.at("zero_row_policy").get<std::string>();
      if (policy == "uniform") {
        cfg.zero_row_policy = ZeroRowPolicy::kUniform;
      } else if (policy == "no_evidence") {
        cfg.zero_row_policy = ZeroRowPolicy::kNoEvidence;
      } else {
        throw Error(ErrorCode::kParseError, "zero_row_policy must be \"uniform\" or \"no_evidence\"");
      }
    }
    cfg.pool_multiplier = get_or(j, "pool_multiplier", cfg.pool_multiplier);
    cfg.exhaustive_subset_cap = get_or(j, "exhaustive_subset_cap", cfg.exhaustive_subset_cap);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  auto in = open_for_read(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["grid"] = {{"n", cfg.grid.n},
               {"origin_lat", cfg.grid.origin_lat},
               {"origin_lon", cfg.grid.origin_lon},
               {"cell_size_km", cfg.grid.cell_size_km}};
  if (const auto* p = std::get_if<SynthParams>(&cfg.history_source)) {
    j["history"] = {{"source", "synthetic"},
                    {"skew", p->skew},
                    {"radius", p->radius},
                    {"queries_per_cell", p->queries_per_cell},
                    {"walks", p->walks},
                    {"walk_length", p->walk_length}};
    if (std::isinf(p->locality)) {
      j["history"]["locality"] = "inf";
    } else {
      j["history"]["locality"] = p->locality;
    }
  } else {
    j["history"] = {{"source", "corpus"}, {"path", std::get<CorpusSource>(cfg.history_source).path}};
  }
  j["k_values"] = cfg.k_values;
  j["path_lengths"] = cfg.path_lengths;
  j["repetitions"] = cfg.repetitions;
  j["algorithms"] = json::array();
  for (auto a : cfg.algorithms) j["algorithms"].push_back(std::string(to_string(a)));
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["adaptive_adversary"] = cfg.adaptive_adversary;
  j["rdg_carry"] = cfg.rdg_carry == RdgCarry::kPosterior ? "posterior" : "max_product";
  j["laplace_alpha"] = cfg.laplace_alpha;
  j["zero_row_policy"] = cfg.zero_row_policy == ZeroRowPolicy::kUniform ? "uniform" : "no_evidence";
  j["pool_multiplier"] = cfg.pool_multiplier;
  j["exhaustive_subset_cap"] = cfg.exhaustive_subset_cap;
  return j.dump(2);
}

}  // namespace dummyloc
