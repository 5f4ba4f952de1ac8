#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dummyloc/grid_model.hpp"
#include "dummyloc/simulation.hpp"

namespace dummyloc {

/// One line of a Geolife PLT file.
struct GpsRecord {
  double latitude = 0.0;
  double longitude = 0.0;
  double altitude_ft = -777.0;  // -777 marks an invalid altitude
  double days = 0.0;            // days since 1899-12-30, fractional
  std::string date;             // YYYY-MM-DD
  std::string time;             // HH:MM:SS

  double seconds() const { return days * 86400.0; }
};

struct PltParse {
  std::vector<GpsRecord> records;
  std::size_t warnings = 0;  // malformed lines skipped
};

/// Skips the 6 header lines, then reads
/// `lat,lon,0,altitude,days,date,time` records.
PltParse parse_plt(std::istream& in);
PltParse parse_plt(const std::string& path);

struct GpsTrack {
  std::string user_id;
  std::vector<GpsRecord> points;  // chronological
};

struct BinningOptions {
  double max_gap_seconds = 20 * 60;  // a longer silence starts a new record
  double min_dwell_seconds = 0.0;    // shorter cell visits are dropped
};

/// Cell containing (lat, lon) when the grid's south-west corner sits at
/// (origin_lat, origin_lon); nullopt outside the box.
std::optional<CellId> locate(const GridSpec& grid, double latitude, double longitude);

std::vector<TrajectoryRecord> bin_trajectories(const std::vector<GpsTrack>& tracks,
                                               const GridSpec& grid, const BinningOptions& options = {});

/// Reads every *.plt under `root` (sorted by path). The user id is the
/// directory above `Trajectory/` when present, otherwise the parent directory.
std::vector<GpsTrack> load_plt_tree(const std::string& root, std::size_t* warnings = nullptr);

// Binned corpus: one `user_id<TAB>cell,cell,...` line per record.
void write_corpus(std::ostream& out, const std::vector<TrajectoryRecord>& records);
void write_corpus(const std::string& path, const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_corpus(std::istream& in);
std::vector<TrajectoryRecord> read_corpus(const std::string& path);

enum class ResultFormat {
  kCsv,   // one row per ResultRow
  kLong,  // one row per (row, metric), for plotting tools
};

std::optional<ResultFormat> parse_result_format(std::string_view name);

inline constexpr std::string_view kResultsHeader =
    "algorithm,k,path_length,mean_cell_entropy,mean_transition_entropy,mean_protection_rate,"
    "stddev_cell_entropy,stddev_transition_entropy,stddev_protection_rate,repetitions,excluded";
inline constexpr std::string_view kLongHeader = "algorithm,k,path_length,metric,mean,stddev,repetitions";

void emit_results(std::ostream& out, const std::vector<ResultRow>& rows, ResultFormat format);
void emit_results(const std::vector<ResultRow>& rows, ResultFormat format, const std::string& path);
std::vector<ResultRow> read_results(std::istream& in);
std::vector<ResultRow> read_results(const std::string& path);

/// Experiment configuration as JSON; every key is optional.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace dummyloc
