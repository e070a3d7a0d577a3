#include "cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "lace/error.hpp"
#include "lace/eval.hpp"
#include "lace/io.hpp"
#include "lace/model.hpp"
#include "lace/model_io.hpp"
#include "lace/predict.hpp"
#include "lace/svg.hpp"
#include "lace/synth.hpp"
#include "lace/text.hpp"

namespace lace::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

json to_json(const RunConfig& c) {
  json j;
  j["inputs"] = c.inputs;
  j["format"] = c.format;
  j["time_scale"] = c.time_scale;
  j["strict"] = c.strict;
  j["split_at"] = c.split_at ? json(*c.split_at) : json(nullptr);
  j["region"] = c.region ? json{c.region->xmin, c.region->xmax, c.region->ymin, c.region->ymax} : json(nullptr);
  j["region_mode"] = c.region_mode;
  j["dt"] = c.dt;
  j["observation_seconds"] = c.observation_seconds;
  j["horizon_seconds"] = c.horizon_seconds;
  j["stride"] = c.stride;
  j["max_tasks"] = c.max_tasks;
  j["k"] = c.k;
  j["max_iters"] = c.max_iters;
  j["speed_bin_width"] = c.speed_bin_width;
  j["speed_max"] = c.speed_max;
  j["direction_bins"] = c.direction_bins;
  j["sigma_omega"] = c.sigma_omega ? json(*c.sigma_omega) : json(nullptr);
  j["sigma_nu"] = c.sigma_nu ? json(*c.sigma_nu) : json(nullptr);
  j["normalize_increment"] = c.normalize_increment;
  j["shuffle_seed"] = c.shuffle_seed ? json(*c.shuffle_seed) : json(nullptr);
  j["r_max"] = c.r_max;
  j["n_samples"] = c.n_samples;
  j["topk"] = c.topk;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["velocity_sigma"] = c.velocity_sigma;
  j["raw_velocity_weights"] = c.raw_velocity_weights;
  j["cell_size"] = c.cell_size;
  return j;
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) throw ConfigError("");
    } else {
      if (!v.is_number_integer()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has the wrong type");
  }
}

Region region_from_values(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 4) throw ConfigError("config: '" + key + "' needs 4 values xmin,xmax,ymin,ymax");
  Region r{v[0], v[1], v[2], v[3]};
  if (!r.valid()) throw ConfigError("config: '" + key + "' must satisfy xmin < xmax and ymin < ymax");
  return r;
}

Region parse_region_text(const std::string& s) {
  std::vector<double> v;
  for (const auto part : text::split(s, ',')) {
    const auto d = text::parse_double(part);
    if (!d) throw ConfigError("region: '" + s + "' is not xmin,xmax,ymin,ymax");
    v.push_back(*d);
  }
  return region_from_values(v, "region");
}

}  // namespace

void apply_json(RunConfig& c, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    c.explicit_keys.insert(key);
    if (key == "inputs") {
      if (!v.is_array()) throw ConfigError("config: key 'inputs' must be an array of paths");
      c.inputs.clear();
      for (const auto& p : v) c.inputs.push_back(get_as<std::string>(p, key));
    } else if (key == "format") {
      c.format = get_as<std::string>(v, key);
    } else if (key == "time_scale") {
      c.time_scale = get_as<double>(v, key);
    } else if (key == "strict") {
      c.strict = get_as<bool>(v, key);
    } else if (key == "split_at") {
      c.split_at = v.is_null() ? std::nullopt : std::optional<double>(get_as<double>(v, key));
    } else if (key == "region") {
      if (v.is_null()) {
        c.region.reset();
      } else {
        if (!v.is_array()) throw ConfigError("config: key 'region' must be [xmin, xmax, ymin, ymax]");
        std::vector<double> vals;
        for (const auto& x : v) vals.push_back(get_as<double>(x, key));
        c.region = region_from_values(vals, key);
      }
    } else if (key == "region_mode") {
      c.region_mode = get_as<std::string>(v, key);
    } else if (key == "dt") {
      c.dt = get_as<double>(v, key);
    } else if (key == "observation_seconds") {
      c.observation_seconds = get_as<double>(v, key);
    } else if (key == "horizon_seconds") {
      c.horizon_seconds = get_as<double>(v, key);
    } else if (key == "stride") {
      c.stride = get_as<int>(v, key);
    } else if (key == "max_tasks") {
      c.max_tasks = get_as<int>(v, key);
    } else if (key == "k") {
      c.k = get_as<int>(v, key);
    } else if (key == "max_iters") {
      c.max_iters = get_as<int>(v, key);
    } else if (key == "speed_bin_width") {
      c.speed_bin_width = get_as<double>(v, key);
    } else if (key == "speed_max") {
      c.speed_max = get_as<double>(v, key);
    } else if (key == "direction_bins") {
      c.direction_bins = get_as<int>(v, key);
    } else if (key == "sigma_omega") {
      c.sigma_omega = v.is_null() ? std::nullopt : std::optional<double>(get_as<double>(v, key));
    } else if (key == "sigma_nu") {
      c.sigma_nu = v.is_null() ? std::nullopt : std::optional<double>(get_as<double>(v, key));
    } else if (key == "normalize_increment") {
      c.normalize_increment = get_as<bool>(v, key);
    } else if (key == "shuffle_seed") {
      c.shuffle_seed = v.is_null() ? std::nullopt : std::optional<std::uint64_t>(get_as<std::uint64_t>(v, key));
    } else if (key == "r_max") {
      c.r_max = get_as<double>(v, key);
    } else if (key == "n_samples") {
      c.n_samples = get_as<int>(v, key);
    } else if (key == "topk") {
      c.topk = get_as<int>(v, key);
    } else if (key == "runs") {
      c.runs = get_as<int>(v, key);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(v, key);
    } else if (key == "velocity_sigma") {
      c.velocity_sigma = get_as<double>(v, key);
    } else if (key == "raw_velocity_weights") {
      c.raw_velocity_weights = get_as<bool>(v, key);
    } else if (key == "cell_size") {
      c.cell_size = get_as<double>(v, key);
    } else if (key == "threads") {
      c.threads = get_as<int>(v, key);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
}

json read_config_source(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file '" + path + "' not found");
  const std::string content = io::read_file(path);
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '#') {
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
      const auto body = text::trim(line);
      if (!body.starts_with("#")) break;
      const auto rest = text::trim(body.substr(1));
      if (rest.starts_with("config ")) {
        try {
          return json::parse(rest.substr(7));
        } catch (const json::parse_error& e) {
          throw ConfigError("config line in '" + path + "' is not valid JSON: " + e.what());
        }
      }
    }
    throw ConfigError("'" + path + "' carries no '# config' line");
  }
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc["config"].is_object()) return doc["config"];
  if (doc.is_object() && doc.contains("format") && doc["format"] == "lace-model")
    throw ConfigError("model '" + path + "' has no embedded config");
  return doc;
}

namespace {

void validate(const RunConfig& c) {
  if (c.format != "normalized" && c.format != "atc" && c.format != "generic")
    throw ConfigError("format must be normalized, atc or generic (got '" + c.format + "')");
  parse_region_mode(c.region_mode);
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  seconds_to_steps(c.observation_seconds, c.dt, "observation_seconds");
  seconds_to_steps(c.horizon_seconds, c.dt, "horizon_seconds");
  if (c.stride < 0) throw ConfigError("stride must be >= 0");
  if (c.max_tasks < 0) throw ConfigError("max_tasks must be >= 0");
  if (c.k < 1) throw ConfigError("k must be >= 1");
  if (c.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(c.time_scale > 0.0)) throw ConfigError("time_scale must be positive");
  if (c.sigma_omega && !(*c.sigma_omega > 0.0)) throw ConfigError("sigma_omega must be positive");
  if (c.sigma_nu && !(*c.sigma_nu > 0.0)) throw ConfigError("sigma_nu must be positive");
  if (!(c.r_max >= 0.0)) throw ConfigError("r_max must be >= 0");
  if (c.n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (c.topk < 1) throw ConfigError("topk must be >= 1");
  if (c.runs < 1) throw ConfigError("runs must be >= 1");
  if (!(c.velocity_sigma > 0.0)) throw ConfigError("velocity_sigma must be positive");
  if (!(c.cell_size > 0.0)) throw ConfigError("cell_size must be positive");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
  BinGeometry::make(c.speed_bin_width, c.speed_max, c.direction_bins);
}

BinGeometry geometry_of(const RunConfig& c) {
  return BinGeometry::make(c.speed_bin_width, c.speed_max, c.direction_bins);
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("no ") + what + " given");
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " '" + path + "' not found");
}

std::string config_comment(const RunConfig& c) { return "config " + to_json(c).dump(); }

// ---------------------------------------------------------------- data

struct Loaded {
  std::vector<Trajectory> trajectories;
  std::size_t records = 0;
  std::size_t skipped_rows = 0;
  std::size_t dropped_tracks = 0;
  std::size_t discarded_records = 0;
};

Loaded load_inputs(const RunConfig& c, std::ostream& err) {
  if (c.inputs.empty()) throw ConfigError("no input files given (--input)");
  for (const auto& p : c.inputs) require_file(p, "input file");
  Loaded out;
  if (c.format == "normalized") {
    for (const auto& p : c.inputs) {
      std::ifstream in(p);
      auto trajs = read_trajectories_csv(in);
      for (auto& t : trajs) {
        if (std::fabs(t.dt - c.dt) > 1e-9 * c.dt)
          throw ConfigError("input '" + p + "' has dt=" + text::format_double(t.dt) + " but the config has dt=" +
                            text::format_double(c.dt));
        out.records += t.size();
        out.trajectories.push_back(std::move(t));
      }
    }
  } else {
    CsvSchema schema = c.format == "atc" ? CsvSchema::atc(c.time_scale) : CsvSchema::generic();
    if (c.format == "generic") schema.time_scale = c.time_scale;
    std::vector<RawRecord> records;
    for (const auto& p : c.inputs) {
      std::ifstream in(p);
      ParseResult r = parse_csv(in, schema, c.strict);
      for (const auto& issue : r.skipped) err << "warning: " << p << ":" << issue.line << ": " << issue.message << "\n";
      out.skipped_rows += r.skipped.size();
      for (auto& rec : r.records) records.push_back(std::move(rec));
    }
    out.records = records.size();
    ResampleResult rs = resample(records, c.dt);
    out.dropped_tracks = rs.dropped_tracks;
    out.discarded_records = rs.discarded_records;
    out.trajectories = std::move(rs.trajectories);
  }
  if (c.region) out.trajectories = filter_region(out.trajectories, *c.region, parse_region_mode(c.region_mode));
  return out;
}

std::int64_t boundary_step(const RunConfig& c) { return std::llround(*c.split_at / c.dt); }

std::vector<Trajectory> training_set(const RunConfig& c, Loaded& data) {
  if (!c.split_at) return std::move(data.trajectories);
  return split_dataset(data.trajectories, boundary_step(c), c.observation_seconds, c.horizon_seconds, c.stride)
      .training;
}

std::vector<PredictionTask> task_set(const RunConfig& c, const Loaded& data) {
  std::vector<PredictionTask> tasks =
      c.split_at
          ? split_dataset(data.trajectories, boundary_step(c), c.observation_seconds, c.horizon_seconds, c.stride)
                .evaluation
          : make_tasks(data.trajectories, c.observation_seconds, c.horizon_seconds, c.stride);
  if (c.max_tasks > 0 && tasks.size() > static_cast<std::size_t>(c.max_tasks))
    tasks.resize(static_cast<std::size_t>(c.max_tasks));
  return tasks;
}

TrainParams train_params(const RunConfig& c) {
  TrainParams p;
  p.geometry = geometry_of(c);
  p.k = c.k;
  p.max_iters = c.max_iters;
  p.seed = c.seed;
  p.sigma_omega = c.sigma_omega;
  p.sigma_nu = c.sigma_nu;
  p.normalize_increment = c.normalize_increment;
  p.shuffle_seed = c.shuffle_seed;
  p.region = c.region;
  p.region_mode = c.region_mode;
  return p;
}

PredictParams predict_params(const RunConfig& c, std::uint64_t seed) {
  PredictParams p;
  p.n_samples = c.n_samples;
  p.r_max = c.r_max;
  p.seed = seed;
  p.weighting.sigma = c.velocity_sigma;
  p.weighting.normalize = !c.raw_velocity_weights;
  return p;
}

// ---------------------------------------------------------------- predictions csv

constexpr const char* kPredictionHeader = "task_id,sample_rank,step,x,y,omega,nu,log_probability,fallback_steps";

void write_predictions(std::ostream& out, const std::vector<PredictionTask>& tasks,
                       const std::vector<std::vector<RolloutResult>>& ranked) {
  using text::format_double;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (std::size_t r = 0; r < ranked[t].size(); ++r) {
      const RolloutResult& roll = ranked[t][r];
      for (std::size_t s = 0; s < roll.trajectory.size(); ++s) {
        const AgentState& st = roll.trajectory.states[s];
        out << tasks[t].id << ',' << (r + 1) << ',' << (s + 1) << ',' << format_double(st.x) << ','
            << format_double(st.y) << ',' << format_double(st.omega) << ',' << format_double(st.nu) << ','
            << format_double(roll.log_probability) << ',' << roll.fallback_steps << '\n';
      }
    }
  }
}

struct PredictionRow {
  int rank = 0;
  int step = 0;
  double x = 0, y = 0, omega = 0, nu = 0, log_probability = 0;
  int fallback_steps = 0;
};

// task id -> rows in file order
std::map<std::string, std::vector<PredictionRow>> read_predictions(const std::string& path) {
  require_file(path, "predictions file");
  std::ifstream in(path);
  std::map<std::string, std::vector<PredictionRow>> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!header) {
      if (body != kPredictionHeader) throw ParseError(line_no, "expected header " + std::string(kPredictionHeader));
      header = true;
      continue;
    }
    const auto f = text::split(body, ',');
    if (f.size() != 9) throw ParseError(line_no, "expected 9 fields, got " + std::to_string(f.size()));
    PredictionRow r;
    const auto rank = text::parse_int(f[1]);
    const auto step = text::parse_int(f[2]);
    const auto x = text::parse_double(f[3]);
    const auto y = text::parse_double(f[4]);
    const auto omega = text::parse_double(f[5]);
    const auto nu = text::parse_double(f[6]);
    const auto lp = text::parse_double(f[7]);
    const auto fb = text::parse_int(f[8]);
    if (!rank || !step || !x || !y || !omega || !nu || !lp || !fb || *rank < 1 || *step < 1)
      throw ParseError(line_no, "malformed prediction row");
    r.rank = static_cast<int>(*rank);
    r.step = static_cast<int>(*step);
    r.x = *x;
    r.y = *y;
    r.omega = *omega;
    r.nu = *nu;
    r.log_probability = *lp;
    r.fallback_steps = static_cast<int>(*fb);
    out[std::string(f[0])].push_back(r);
  }
  if (!header) throw DataError("predictions file '" + path + "' has no header row");
  return out;
}

std::vector<RolloutResult> to_rollouts(const std::vector<PredictionRow>& rows, const PredictionTask& task,
                                       const std::string& path) {
  std::vector<RolloutResult> out;
  for (const PredictionRow& r : rows) {
    if (r.rank > static_cast<int>(out.size()) + 1 || (r.rank == static_cast<int>(out.size()) + 1 && r.step != 1))
      throw DataError(path + ": task '" + task.id + "' rollouts out of order");
    if (r.rank == static_cast<int>(out.size()) + 1) {
      RolloutResult roll;
      roll.sample_index = r.rank - 1;
      roll.log_probability = r.log_probability;
      roll.fallback_steps = r.fallback_steps;
      roll.trajectory.person_id = task.observed.person_id;
      roll.trajectory.dt = task.dt;
      out.push_back(std::move(roll));
    }
    RolloutResult& roll = out[static_cast<std::size_t>(r.rank) - 1];
    if (r.rank != static_cast<int>(out.size()) || r.step != static_cast<int>(roll.trajectory.size()) + 1)
      throw DataError(path + ": task '" + task.id + "' rollouts out of order");
    AgentState s;
    s.x = r.x;
    s.y = r.y;
    s.omega = r.omega;
    s.nu = r.nu;
    s.t = task.observed.states.back().t + r.step;
    roll.trajectory.states.push_back(s);
  }
  return out;
}

std::string run_path(const std::string& output, int run, int runs) {
  if (runs == 1) return output;
  fs::path p(output);
  char buf[32];
  std::snprintf(buf, sizeof buf, ".run%02d", run + 1);
  fs::path name = p.stem();
  name += buf;
  name += p.extension();
  return (p.parent_path() / name).string();
}

// ---------------------------------------------------------------- commands

int cmd_synth(const RunConfig& c, const std::string& scenario_arg, std::optional<int> agents, std::ostream& err) {
  if (c.output.empty()) throw ConfigError("synth needs an output path (-o)");
  FlowScenario sc;
  const auto names = builtin_scenario_names();
  if (std::find(names.begin(), names.end(), scenario_arg) != names.end()) {
    sc = builtin_scenario(scenario_arg);
  } else {
    require_file(scenario_arg, "scenario file");
    sc = load_scenario(scenario_arg);
  }
  sc.seed = c.seed;
  if (agents) sc.agents = *agents;
  validate(sc);
  const auto trajs = generate(sc, c.dt);
  std::ostringstream csv;
  write_trajectories_csv(csv, trajs,
                         "lace synth\nscenario " + scenario_to_json(sc).dump() + "\n" + config_comment(c));
  io::write_file_atomic(c.output, csv.str());
  err << "synth: " << trajs.size() << " trajectories -> " << c.output << "\n";
  return 0;
}

int cmd_train(const RunConfig& c, std::string report_path, std::ostream& err) {
  if (c.output.empty()) throw ConfigError("train needs an output path (-o)");
  Loaded data = load_inputs(c, err);
  const auto records = data.records;
  const auto dropped = data.dropped_tracks;
  const auto skipped = data.skipped_rows;
  const auto discarded = data.discarded_records;
  std::vector<Trajectory> trajs = training_set(c, data);
  if (trajs.empty()) throw DataError("train: no trajectories left after ingest, region filter and split");

  TrainReport rep;
  const LaceModel model = train(trajs, train_params(c), &rep);
  save_model(c.output, model, to_json(c));

  double kl_min = INFINITY, kl_max = 0.0, kl_sum = 0.0;
  for (const auto& cl : model.clusters()) {
    kl_min = std::min(kl_min, cl.kl_divergence);
    kl_max = std::max(kl_max, cl.kl_divergence);
    kl_sum += cl.kl_divergence;
  }
  const int n_bins = 10;
  const double top = kl_max > 0.0 ? kl_max : 1.0;
  std::vector<double> edges(n_bins + 1);
  std::vector<std::size_t> counts(n_bins, 0);
  for (int i = 0; i <= n_bins; ++i) edges[i] = top * i / n_bins;
  for (const auto& cl : model.clusters())
    ++counts[std::min(n_bins - 1, static_cast<int>(cl.kl_divergence / top * n_bins))];

  json report = {{"observations", rep.observations},
                 {"trajectories", trajs.size()},
                 {"requested_k", rep.requested_k},
                 {"effective_k", rep.effective_k},
                 {"kmeans_iterations", rep.kmeans_iterations},
                 {"kmeans_converged", rep.kmeans_converged},
                 {"clusters_kept", rep.clusters_kept},
                 {"clusters_dropped", rep.clusters_dropped},
                 {"overspeed_clipped", rep.overspeed_clipped},
                 {"warnings", rep.warnings},
                 {"source_fingerprint", model.params().source_fingerprint},
                 {"ingest",
                  {{"records", records},
                   {"skipped_rows", skipped},
                   {"dropped_tracks", dropped},
                   {"discarded_records", discarded}}},
                 {"kl_nats",
                  {{"min", kl_min},
                   {"mean", kl_sum / static_cast<double>(model.clusters().size())},
                   {"max", kl_max},
                   {"histogram", {{"edges", edges}, {"counts", counts}}}}},
                 {"config", to_json(c)}};
  if (report_path.empty()) {
    fs::path p(c.output);
    report_path = (p.parent_path() / (p.stem().string() + ".report.json")).string();
  }
  io::write_file_atomic(report_path, report.dump(2) + "\n");
  for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
  err << "train: " << rep.clusters_kept << " clusters from " << rep.observations << " observations -> " << c.output
      << "\n";
  return 0;
}

int cmd_predict(const RunConfig& c, const std::string& model_path, const std::string& baseline, std::ostream& err) {
  if (c.output.empty()) throw ConfigError("predict needs an output path (-o)");
  require_file(model_path, "model file");
  const bool cvm = baseline == "cvm";
  LaceModel model;
  if (!cvm) {
    model = load_model(model_path);
    const BinGeometry want = geometry_of(c);
    const bool geometry_set = c.explicit_keys.count("speed_bin_width") || c.explicit_keys.count("speed_max") ||
                              c.explicit_keys.count("direction_bins");
    if (geometry_set && !(want == model.geometry()))
      throw ConfigError("model '" + model_path + "' was trained with a different bin geometry than the config");
  }
  Loaded data = load_inputs(c, err);
  const auto tasks = task_set(c, data);
  if (tasks.empty()) throw DataError("predict: no prediction tasks in the input");

  const int runs = cvm ? 1 : c.runs;
  for (int r = 0; r < runs; ++r) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(r);
    std::vector<std::vector<RolloutResult>> ranked;
    if (cvm) {
      VelocityWeighting w{c.velocity_sigma, !c.raw_velocity_weights};
      for (const auto& t : tasks) ranked.push_back({predict_cvm(t, w)});
    } else {
      ranked = predict_lace_batch(model, tasks, predict_params(c, seed));
    }
    std::ostringstream csv;
    csv << "# lace predictions baseline=" << (cvm ? "cvm" : "lace") << " run=" << (r + 1) << " seed=" << seed
        << " model=" << (cvm ? std::string("none") : model.params().source_fingerprint) << "\n";
    csv << "# " << config_comment(c) << "\n";
    csv << kPredictionHeader << "\n";
    write_predictions(csv, tasks, ranked);
    const std::string path = run_path(c.output, r, runs);
    io::write_file_atomic(path, csv.str());
    err << "predict: " << tasks.size() << " tasks -> " << path << "\n";
  }
  return 0;
}

int cmd_eval(const RunConfig& c, const std::vector<std::string>& prediction_paths, std::ostream& err) {
  if (c.output.empty()) throw ConfigError("eval needs an output directory (-o)");
  if (prediction_paths.empty()) throw ConfigError("eval needs at least one predictions file (--predictions)");
  for (const auto& p : prediction_paths) require_file(p, "predictions file");
  Loaded data = load_inputs(c, err);
  const auto tasks = task_set(c, data);
  if (tasks.empty()) throw DataError("eval: no prediction tasks in the input");
  const int horizon = seconds_to_steps(c.horizon_seconds, c.dt, "horizon_seconds");

  std::vector<TaskScore> scores;
  for (std::size_t run = 0; run < prediction_paths.size(); ++run) {
    const std::string& path = prediction_paths[run];
    auto rows = read_predictions(path);
    for (const auto& t : tasks)
      if (!rows.count(t.id)) throw DataError(path + ": no predictions for task '" + t.id + "'");
    if (rows.size() != tasks.size()) {
      std::set<std::string> ids;
      for (const auto& t : tasks) ids.insert(t.id);
      for (const auto& [id, r] : rows)
        if (!ids.count(id)) throw DataError(path + ": predictions for unknown task '" + id + "'");
    }
    std::vector<TaskScore> run_scores(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto rollouts = to_rollouts(rows.at(tasks[i].id), tasks[i], path);
      run_scores[i] = score_task(rollouts, tasks[i], c.topk, static_cast<int>(run));
    }
    for (auto& s : run_scores) scores.push_back(std::move(s));
  }

  const AggregateSummary agg = aggregate(scores);
  const auto curve = horizon_curve(scores, horizon);

  Region bounds;
  if (c.region) {
    bounds = *c.region;
  } else {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : scores) {
      x0 = std::min(x0, s.gt_final_position.x);
      x1 = std::max(x1, s.gt_final_position.x);
      y0 = std::min(y0, s.gt_final_position.y);
      y1 = std::max(y1, s.gt_final_position.y);
    }
    const double cs = c.cell_size;
    bounds = {std::floor(x0 / cs) * cs, 0.0, std::floor(y0 / cs) * cs, 0.0};
    bounds.xmax = std::max(std::ceil(x1 / cs) * cs, bounds.xmin + cs);
    bounds.ymax = std::max(std::ceil(y1 / cs) * cs, bounds.ymin + cs);
    if (bounds.xmax <= x1) bounds.xmax += cs;
    if (bounds.ymax <= y1) bounds.ymax += cs;
  }
  const HeatmapGrid grid = heatmap(scores, c.cell_size, bounds);

  const fs::path dir(c.output);
  fs::create_directories(dir);
  using text::format_double;
  {
    std::ostringstream csv;
    csv << "# lace eval per-task scores\n# " << config_comment(c) << "\n";
    csv << "run,task_id,horizon_steps,ade,fde,topk_ade,topk_fde,gt_final_x,gt_final_y\n";
    for (const auto& s : scores)
      csv << (s.run + 1) << ',' << s.task_id << ',' << s.horizon_steps << ',' << format_double(s.ade) << ','
          << format_double(s.fde) << ',' << format_double(s.topk_ade) << ',' << format_double(s.topk_fde) << ','
          << format_double(s.gt_final_position.x) << ',' << format_double(s.gt_final_position.y) << '\n';
    io::write_file_atomic(dir / "per_task.csv", csv.str());
  }
  json curve_json = json::array();
  for (const auto& p : curve)
    curve_json.push_back({{"horizon_steps", p.horizon},
                          {"horizon_seconds", p.horizon * c.dt},
                          {"ade", p.count ? json(p.ade) : json(nullptr)},
                          {"fde", p.count ? json(p.fde) : json(nullptr)},
                          {"count", p.count}});
  auto stat = [](const MetricStats& m) { return json{{"mean", m.mean}, {"std", m.std}, {"per_run", m.per_run}}; };
  json summary = {{"runs", agg.runs},
                  {"tasks", tasks.size()},
                  {"scores", agg.tasks},
                  {"single_run", agg.single_run},
                  {"topk", c.topk},
                  {"ade", stat(agg.ade)},
                  {"fde", stat(agg.fde)},
                  {"topk_ade", stat(agg.topk_ade)},
                  {"topk_fde", stat(agg.topk_fde)},
                  {"heatmap", {{"cell_size", grid.cell_size},
                               {"bounds", {grid.bounds.xmin, grid.bounds.xmax, grid.bounds.ymin, grid.bounds.ymax}},
                               {"out_of_bounds", grid.out_of_bounds}}},
                  {"predictions", prediction_paths},
                  {"config", to_json(c)}};
  io::write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  json curve_doc = {{"horizon_curve", curve_json}, {"config", to_json(c)}};
  io::write_file_atomic(dir / "horizon_curve.json", curve_doc.dump(2) + "\n");
  {
    std::ostringstream csv;
    write_heatmap_csv(csv, grid, "lace eval FDE heatmap\n" + config_comment(c));
    io::write_file_atomic(dir / "heatmap.csv", csv.str());
  }
  err << "eval: " << agg.runs << " run(s), ADE " << format_double(agg.ade.mean) << " FDE "
      << format_double(agg.fde.mean) << " -> " << dir.string() << "\n";
  return 0;
}

int cmd_export(const RunConfig& c, const std::string& kind, const std::string& model_path,
               const std::string& heatmap_path, std::ostream& err) {
  if (c.output.empty()) throw ConfigError("export needs an output path (-o)");
  std::string svg_text;
  if (kind == "arrows") {
    require_file(model_path, "model file");
    svg_text = svg::render_arrows(load_model(model_path));
  } else if (kind == "heatmap") {
    require_file(heatmap_path, "heatmap file");
    std::ifstream in(heatmap_path);
    svg_text = svg::render_heatmap(read_heatmap_csv(in));
  } else {
    throw ConfigError("unknown export kind '" + kind + "' (arrows or heatmap)");
  }
  io::write_file_atomic(c.output, svg_text);
  err << "export: " << kind << " -> " << c.output << "\n";
  return 0;
}

std::string env_name(const std::string& flag) {
  std::string s = "LACE_";
  for (char ch : flag.substr(flag.rfind("--") + 2)) s += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laminar-component map of dynamics: train, predict, evaluate, synthesise, export"};
  app.name("lace");
  app.require_subcommand(1);
  app.fallthrough();

  // Overrides: defaults < --config file < LACE_* environment < flags.
  std::string config_path;
  app.add_option("--config", config_path, "JSON config, model file or output file with an embedded config")
      ->envname("LACE_CONFIG");

  std::map<std::string, std::string> values;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, CLI::Option*>> value_opts;
  auto value = [&](const std::string& flag, const std::string& help) {
    CLI::Option* o = app.add_option(flag, values[flag], help)->envname(env_name(flag));
    const bool text_value = flag == "--format" || flag == "--region" || flag == "--region-mode" || flag == "-o,--output";
    o->type_name(text_value ? "TEXT" : "NUMBER");
    value_opts.emplace_back(flag, o);
  };
  app.add_option("-i,--input", inputs, "input trajectory files")->envname("LACE_INPUT")->delimiter(',');
  value("--format", "normalized | atc | generic");
  value("--time-scale", "raw time unit in seconds (atc/generic)");
  value("--split-at", "seconds; earlier states train, later ones are evaluated");
  value("--region", "xmin,xmax,ymin,ymax");
  value("--region-mode", "clip | contain");
  value("--dt", "time step, seconds");
  value("--observation-seconds", "O_s");
  value("--horizon-seconds", "T_s");
  value("--stride", "task window stride in steps (0: full window)");
  value("--max-tasks", "use at most this many tasks (0: all)");
  value("--k", "number of clusters");
  value("--max-iters", "k-means iteration limit");
  value("--speed-bin-width", "m/s");
  value("--speed-max", "m/s");
  value("--direction-bins", "number of direction bins");
  value("--sigma-omega", "measurement width, radians (default one bin)");
  value("--sigma-nu", "measurement width, m/s (default one bin)");
  value("--shuffle-seed", "shuffle each cluster's observations (diagnostic)");
  value("--r-max", "coverage radius, meters");
  value("--n-samples", "rollouts per task");
  value("--topk", "k for top-k metrics");
  value("--runs", "prediction runs");
  value("--seed", "master seed");
  value("--velocity-sigma", "recency kernel width, steps");
  value("--cell-size", "heatmap cell, meters");
  value("--threads", "OpenMP threads (0: runtime default)");
  value("-o,--output", "output file (directory for eval)");
  bool strict = false, normalize_increment = false, raw_weights = false;
  auto* strict_opt = app.add_flag("--strict", strict, "abort on malformed input rows")->envname("LACE_STRICT");
  auto* norm_opt = app.add_flag("--normalize-increment", normalize_increment, "normalise tally increments (diagnostic)")
                       ->envname("LACE_NORMALIZE_INCREMENT");
  auto* raw_opt = app.add_flag("--raw-velocity-weights", raw_weights, "use unnormalised recency weights")
                      ->envname("LACE_RAW_VELOCITY_WEIGHTS");

  auto* synth = app.add_subcommand("synth", "generate a synthetic trajectory corpus");
  std::string scenario;
  std::optional<int> agents;
  synth->add_option("--scenario", scenario, "built-in name or scenario JSON file")->required();
  synth->add_option("--agents", agents, "override the scenario's agent count");

  auto* train_cmd = app.add_subcommand("train", "learn a LaCE model");
  std::string report;
  train_cmd->add_option("--report", report, "training report path (default <output>.report.json)");

  auto* predict = app.add_subcommand("predict", "predict trajectories for every task");
  std::string model_path;
  std::string baseline = "lace";
  predict->add_option("-m,--model", model_path, "model file");
  predict->add_option("--baseline", baseline, "lace | cvm")->check(CLI::IsMember({"lace", "cvm"}));

  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  std::vector<std::string> predictions;
  eval->add_option("-p,--predictions", predictions, "predictions files, one per run")->required();

  auto* exp = app.add_subcommand("export", "render an SVG");
  std::string kind;
  std::string heatmap_path;
  std::string export_model;
  exp->add_option("--kind", kind, "arrows | heatmap")->required();
  exp->add_option("-m,--model", export_model, "model file (arrows)");
  exp->add_option("--heatmap", heatmap_path, "heatmap CSV from eval (heatmap)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_json(cfg, read_config_source(config_path));
    json overrides = json::object();
    if (!inputs.empty()) overrides["inputs"] = inputs;
    for (const auto& [flag, opt] : value_opts) {
      if (opt->count() == 0) continue;
      const std::string& raw = values[flag];
      std::string key = opt->get_name();
      key = key.substr(key.find_first_not_of('-'));
      std::replace(key.begin(), key.end(), '-', '_');
      if (key == "output") {
        cfg.output = raw;
        continue;
      }
      if (key == "format" || key == "region_mode") {
        overrides[key] = raw;
      } else if (key == "region") {
        const Region r = parse_region_text(raw);
        overrides[key] = {r.xmin, r.xmax, r.ymin, r.ymax};
      } else {
        const auto d = text::parse_double(raw);
        if (!d) throw ConfigError("--" + opt->get_name().substr(opt->get_name().find_first_not_of('-')) + ": '" +
                                  raw + "' is not a number");
        const bool integral = key == "stride" || key == "max_tasks" || key == "k" || key == "max_iters" ||
                              key == "direction_bins" || key == "n_samples" || key == "topk" || key == "runs" ||
                              key == "threads" || key == "seed" || key == "shuffle_seed";
        if (integral) {
          const auto n = text::parse_int(raw);
          if (!n) throw ConfigError("--" + key + ": '" + raw + "' is not an integer");
          if ((key == "seed" || key == "shuffle_seed")) {
            if (*n < 0) throw ConfigError("--" + key + " must be >= 0");
            overrides[key] = static_cast<std::uint64_t>(*n);
          } else {
            overrides[key] = static_cast<int>(*n);
          }
        } else {
          overrides[key] = *d;
        }
      }
    }
    if (strict_opt->count()) overrides["strict"] = strict;
    if (norm_opt->count()) overrides["normalize_increment"] = normalize_increment;
    if (raw_opt->count()) overrides["raw_velocity_weights"] = raw_weights;
    apply_json(cfg, overrides);
    validate(cfg);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    if (synth->parsed()) return cmd_synth(cfg, scenario, agents, err);
    if (train_cmd->parsed()) return cmd_train(cfg, report, err);
    if (predict->parsed()) return cmd_predict(cfg, model_path, baseline, err);
    if (eval->parsed()) return cmd_eval(cfg, predictions, err);
    if (exp->parsed()) return cmd_export(cfg, kind, export_model, heatmap_path, err);
    err << "lace: no command\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "lace: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "lace: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lace::cli
