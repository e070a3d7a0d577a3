#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lace/core.hpp"

namespace lace {

struct RawRecord {
  double time = 0.0;  // seconds
  std::string person_id;
  double x = 0.0;  // meters
  double y = 0.0;
  std::optional<double> speed;         // m/s, diagnostics only
  std::optional<double> motion_angle;  // radians, diagnostics only
};

/// A column is addressed by header name, or by zero-based index when the file
/// has no header row.
struct ColumnRef {
  std::string name;
  int index = -1;

  bool configured() const { return index >= 0 || !name.empty(); }
};

/// Column mapping and units of a trajectory CSV. Scales multiply the raw
/// values into seconds, meters and m/s.
struct CsvSchema {
  bool has_header = true;
  char delimiter = ',';
  ColumnRef time;
  ColumnRef person_id;
  ColumnRef x;
  ColumnRef y;
  ColumnRef speed;         // optional
  ColumnRef motion_angle;  // optional
  double time_scale = 1.0;
  double length_scale = 1.0;
  double speed_scale = 1.0;

  /// ATC shopping-mall layout: time, person_id, x, y, z, velocity,
  /// motion_angle, facing_angle; lengths in mm, velocity in mm/s. `time_scale`
  /// is 1 for the distributed files (unix seconds with fractional ms) and
  /// 1e-3 for exports that store integer milliseconds.
  static CsvSchema atc(double time_scale = 1.0);

  /// Header-named columns time, person_id, x, y in SI units.
  static CsvSchema generic();
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<ParseIssue> skipped;  // only populated in lenient mode
};

/// Reads raw records. In strict mode the first malformed row throws
/// ParseError carrying its line number; otherwise it is skipped and reported.
/// A schema that names a column the header lacks raises ConfigError.
ParseResult parse_csv(std::istream& in, const CsvSchema& schema, bool strict);

struct ResampleResult {
  std::vector<Trajectory> trajectories;
  std::size_t dropped_tracks = 0;  // segments shorter than 2 states
  std::size_t discarded_records = 0;  // raw records not selected for any grid slot
};

/// Nearest-sample downsampling onto the global grid t = k * dt. Each grid
/// slot takes the record closest in time within dt/2 (earlier wins ties);
/// missing slots split a person's track. Output ordered by (person_id, t).
ResampleResult resample(const std::vector<RawRecord>& records, double dt);

/// Non-overlapping windows by default (stride = O_p + T_p). Tasks whose
/// ground truth would be empty are not produced.
std::vector<PredictionTask> make_tasks(const std::vector<Trajectory>& trajectories,
                                       double observation_seconds, double horizon_seconds,
                                       int stride = 0);

struct Region {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
  bool valid() const { return xmin < xmax && ymin < ymax; }
};

enum class RegionMode { kClip, kContain };

RegionMode parse_region_mode(const std::string& s);
const char* to_string(RegionMode mode);

/// kClip keeps maximal in-region runs (velocities recomputed per run);
/// kContain keeps only trajectories lying wholly inside.
std::vector<Trajectory> filter_region(const std::vector<Trajectory>& trajectories,
                                      const Region& region, RegionMode mode);

struct DatasetSplit {
  std::vector<Trajectory> training;
  std::vector<PredictionTask> evaluation;
};

/// States with t < boundary_step feed training, the rest evaluation tasks.
DatasetSplit split_dataset(const std::vector<Trajectory>& trajectories, std::int64_t boundary_step,
                           double observation_seconds, double horizon_seconds, int stride = 0);

/// Normalized trajectory CSV: comment lines start with '#', then the header
/// person_id,t,x,y,omega,nu. Angles in radians. The dt is carried in a
/// `# dt=<seconds>` comment.
void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories,
                            const std::string& header_comment = {});
std::vector<Trajectory> read_trajectories_csv(std::istream& in);

}  // namespace lace
