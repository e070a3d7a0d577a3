#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "lace/ingest.hpp"

namespace lace::cli {

// Every experiment knob. Defaults are the standard evaluation setup.
struct RunConfig {
  std::vector<std::string> inputs;
  std::string format = "normalized";  // normalized | atc | generic
  double time_scale = 1.0;            // raw time column -> seconds
  bool strict = false;
  std::optional<double> split_at;  // seconds; earlier states train, later ones are evaluated
  std::optional<Region> region;
  std::string region_mode = "clip";
  double dt = 1.0;
  double observation_seconds = 3.0;
  double horizon_seconds = 20.0;
  int stride = 0;     // 0: one full window
  int max_tasks = 0;  // 0: all
  int k = 500;
  int max_iters = 100;
  double speed_bin_width = 0.2;
  double speed_max = 5.0;
  int direction_bins = 36;
  std::optional<double> sigma_omega;  // radians
  std::optional<double> sigma_nu;     // m/s
  bool normalize_increment = false;
  std::optional<std::uint64_t> shuffle_seed;
  double r_max = 2.0;
  int n_samples = 5;
  int topk = 5;
  int runs = 10;
  std::uint64_t seed = 42;
  double velocity_sigma = 1.5;
  bool raw_velocity_weights = false;
  double cell_size = 1.0;

  // not part of the embedded config: they do not change results
  int threads = 0;
  std::string output;
  std::set<std::string> explicit_keys;
};

/// Effective config as embedded in outputs (threads and output excluded).
nlohmann::json to_json(const RunConfig& config);

/// Applies the keys present in `doc` on top of `config`. Unknown keys and
/// wrong types raise ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& doc);

/// Reads a config from a JSON file, a model file (its "config" member), an
/// eval summary, or a CSV output carrying a "# config {...}" line.
nlohmann::json read_config_source(const std::string& path);

/// Entry point used by the executable and the tests. Returns the exit code:
/// 0 success, 1 runtime failure, 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lace::cli
