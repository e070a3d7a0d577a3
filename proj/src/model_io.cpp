#include "lace/model_io.hpp"

#include <cmath>

#include "lace/error.hpp"
#include "lace/io.hpp"

namespace lace {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw ConfigError("model schema: field '" + field + "' " + what);
}

const json& member(const json& obj, const std::string& path, const char* key) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.is_object()) schema_error(path.empty() ? "<root>" : path, "must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(field, "is missing");
  return *it;
}

double number(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_number()) schema_error(path.empty() ? key : path + "." + key, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(path.empty() ? key : path + "." + key, "must be finite");
  return d;
}

long long integer(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_number_integer()) schema_error(path.empty() ? key : path + "." + key, "must be an integer");
  return v.get<long long>();
}

std::uint64_t unsigned_integer(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_number_unsigned()) schema_error(path.empty() ? key : path + "." + key, "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

json probs_to_json(const std::vector<double>& probs) { return json(probs); }

std::vector<double> probs_from_json(const json& v, const std::string& field, std::size_t expected) {
  if (!v.is_array()) schema_error(field, "must be an array");
  if (v.size() != expected)
    schema_error(field, "must have " + std::to_string(expected) + " entries, has " + std::to_string(v.size()));
  std::vector<double> out(expected);
  double sum = 0.0;
  for (std::size_t i = 0; i < expected; ++i) {
    if (!v[i].is_number()) schema_error(field + "[" + std::to_string(i) + "]", "must be a number");
    out[i] = v[i].get<double>();
    if (!(out[i] >= 0.0) || !std::isfinite(out[i]))
      schema_error(field + "[" + std::to_string(i) + "]", "must be a finite probability >= 0");
    sum += out[i];
  }
  if (std::fabs(sum - 1.0) > 1e-9) schema_error(field, "must sum to 1");
  return out;
}

}  // namespace

nlohmann::json model_to_json(const LaceModel& model, const nlohmann::json& config) {
  const BinGeometry& g = model.geometry();
  const TrainParams& p = model.params();
  json doc;
  doc["format"] = "lace-model";
  doc["format_version"] = kModelFormatVersion;
  doc["kl_units"] = "nats";
  doc["geometry"] = {{"speed_bin_width", g.speed_bin_width()},
                     {"speed_max", g.speed_max()},
                     {"n_speed_bins", g.n_speed_bins()},
                     {"n_direction_bins", g.n_direction_bins()},
                     {"direction_bin_width", g.direction_bin_width()}};
  json params = {{"k", p.k},
                 {"max_iters", p.max_iters},
                 {"seed", p.seed},
                 {"sigma_omega", p.filter().sigma_omega},
                 {"sigma_nu", p.filter().sigma_nu},
                 {"normalize_increment", p.normalize_increment},
                 {"kl_epsilon", p.kl_epsilon},
                 {"region_mode", p.region_mode},
                 {"source_fingerprint", p.source_fingerprint}};
  params["shuffle_seed"] = p.shuffle_seed ? json(*p.shuffle_seed) : json(nullptr);
  params["region"] = p.region ? json{{"xmin", p.region->xmin},
                                     {"xmax", p.region->xmax},
                                     {"ymin", p.region->ymin},
                                     {"ymax", p.region->ymax}}
                              : json(nullptr);
  doc["params"] = std::move(params);
  if (!config.is_null()) doc["config"] = config;
  json clusters = json::array();
  for (const ClusterModel& c : model.clusters()) {
    clusters.push_back({{"centroid", {c.centroid.x, c.centroid.y}},
                        {"member_count", c.member_count},
                        {"kl_divergence", c.kl_divergence},
                        {"gamma_r", probs_to_json(c.gamma_r.probs)},
                        {"gamma_l", probs_to_json(c.gamma_l.probs)}});
  }
  doc["clusters"] = std::move(clusters);
  return doc;
}

LaceModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) schema_error("<root>", "must be an object");
  const json& format = member(doc, "", "format");
  if (!format.is_string() || format.get<std::string>() != "lace-model") schema_error("format", "must be \"lace-model\"");
  const long long version = integer(doc, "", "format_version");
  if (version != kModelFormatVersion)
    schema_error("format_version", "is " + std::to_string(version) + ", expected " +
                                       std::to_string(kModelFormatVersion));

  const json& gj = member(doc, "", "geometry");
  const double width = number(gj, "geometry", "speed_bin_width");
  const double vmax = number(gj, "geometry", "speed_max");
  const long long n_dir = integer(gj, "geometry", "n_direction_bins");
  const long long n_speed = integer(gj, "geometry", "n_speed_bins");
  if (!(width > 0.0)) schema_error("geometry.speed_bin_width", "must be positive");
  if (!(vmax > 0.0)) schema_error("geometry.speed_max", "must be positive");
  if (n_dir < 1 || n_dir > 100000) schema_error("geometry.n_direction_bins", "out of range");
  const BinGeometry geometry = BinGeometry::make(width, vmax, static_cast<int>(n_dir));
  if (geometry.n_speed_bins() != n_speed)
    schema_error("geometry.n_speed_bins", "inconsistent with speed_bin_width and speed_max");

  const json& pj = member(doc, "", "params");
  TrainParams params;
  params.geometry = geometry;
  params.k = static_cast<int>(integer(pj, "params", "k"));
  params.max_iters = static_cast<int>(integer(pj, "params", "max_iters"));
  params.seed = unsigned_integer(pj, "params", "seed");
  params.sigma_omega = number(pj, "params", "sigma_omega");
  params.sigma_nu = number(pj, "params", "sigma_nu");
  if (!(*params.sigma_omega > 0.0)) schema_error("params.sigma_omega", "must be positive");
  if (!(*params.sigma_nu > 0.0)) schema_error("params.sigma_nu", "must be positive");
  const json& norm = member(pj, "params", "normalize_increment");
  if (!norm.is_boolean()) schema_error("params.normalize_increment", "must be a boolean");
  params.normalize_increment = norm.get<bool>();
  params.kl_epsilon = number(pj, "params", "kl_epsilon");
  const json& mode = member(pj, "params", "region_mode");
  if (!mode.is_string()) schema_error("params.region_mode", "must be a string");
  params.region_mode = mode.get<std::string>();
  const json& fp = member(pj, "params", "source_fingerprint");
  if (!fp.is_string()) schema_error("params.source_fingerprint", "must be a string");
  params.source_fingerprint = fp.get<std::string>();
  const json& shuffle = member(pj, "params", "shuffle_seed");
  if (!shuffle.is_null()) params.shuffle_seed = unsigned_integer(pj, "params", "shuffle_seed");
  const json& region = member(pj, "params", "region");
  if (!region.is_null()) {
    params.region = Region{number(region, "params.region", "xmin"), number(region, "params.region", "xmax"),
                           number(region, "params.region", "ymin"), number(region, "params.region", "ymax")};
  }

  const json& cj = member(doc, "", "clusters");
  if (!cj.is_array()) schema_error("clusters", "must be an array");
  if (cj.empty()) schema_error("clusters", "must not be empty");
  std::vector<ClusterModel> clusters;
  clusters.reserve(cj.size());
  const auto n_states = static_cast<std::size_t>(geometry.size());
  for (std::size_t i = 0; i < cj.size(); ++i) {
    const std::string path = "clusters[" + std::to_string(i) + "]";
    const json& c = cj[i];
    ClusterModel cm;
    const json& centroid = member(c, path, "centroid");
    if (!centroid.is_array() || centroid.size() != 2 || !centroid[0].is_number() || !centroid[1].is_number())
      schema_error(path + ".centroid", "must be [x, y]");
    cm.centroid = {centroid[0].get<double>(), centroid[1].get<double>()};
    cm.member_count = static_cast<std::size_t>(unsigned_integer(c, path, "member_count"));
    cm.kl_divergence = number(c, path, "kl_divergence");
    if (cm.kl_divergence < 0.0) schema_error(path + ".kl_divergence", "must be >= 0");
    cm.gamma_r = {geometry, probs_from_json(member(c, path, "gamma_r"), path + ".gamma_r", n_states),
                  cm.member_count};
    cm.gamma_l = {geometry, probs_from_json(member(c, path, "gamma_l"), path + ".gamma_l", n_states),
                  cm.member_count};
    clusters.push_back(std::move(cm));
  }
  return LaceModel(geometry, std::move(clusters), std::move(params));
}

std::string dump_model(const LaceModel& model, const nlohmann::json& config) {
  return model_to_json(model, config).dump() + "\n";
}

void save_model(const std::filesystem::path& path, const LaceModel& model, const nlohmann::json& config) {
  io::write_file_atomic(path, dump_model(model, config));
}

LaceModel load_model(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("model '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace lace
