#include "lace/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "lace/error.hpp"
#include "lace/text.hpp"

namespace lace {
namespace {

struct ResolvedColumns {
  int time = -1;
  int person_id = -1;
  int x = -1;
  int y = -1;
  int speed = -1;
  int motion_angle = -1;
};

int resolve(const ColumnRef& ref, const std::vector<std::string_view>* header, bool required,
            const char* role) {
  if (!ref.configured()) {
    if (required) throw ConfigError(std::string("schema: required column '") + role + "' not configured");
    return -1;
  }
  if (!ref.name.empty() && header != nullptr) {
    for (std::size_t i = 0; i < header->size(); ++i) {
      if ((*header)[i] == ref.name) return static_cast<int>(i);
    }
    if (ref.index >= 0) return ref.index;
    if (required)
      throw ConfigError(std::string("schema: missing required column '") + ref.name + "' (" + role + ")");
    return -1;
  }
  if (ref.index < 0)
    throw ConfigError(std::string("schema: column '") + role + "' needs an index when the file has no header");
  return ref.index;
}

bool is_skippable(std::string_view line) {
  const auto t = text::trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

CsvSchema CsvSchema::atc(double time_scale) {
  CsvSchema s;
  s.has_header = false;
  s.time = {"", 0};
  s.person_id = {"", 1};
  s.x = {"", 2};
  s.y = {"", 3};
  s.speed = {"", 5};
  s.motion_angle = {"", 6};
  s.time_scale = time_scale;
  s.length_scale = 1e-3;
  s.speed_scale = 1e-3;
  return s;
}

CsvSchema CsvSchema::generic() {
  CsvSchema s;
  s.time = {"time", -1};
  s.person_id = {"person_id", -1};
  s.x = {"x", -1};
  s.y = {"y", -1};
  return s;
}

ParseResult parse_csv(std::istream& in, const CsvSchema& schema, bool strict) {
  ParseResult result;
  ResolvedColumns cols;
  bool resolved = false;
  std::string line;
  std::size_t line_no = 0;

  auto resolve_all = [&](const std::vector<std::string_view>* header) {
    cols.time = resolve(schema.time, header, true, "time");
    cols.person_id = resolve(schema.person_id, header, true, "person_id");
    cols.x = resolve(schema.x, header, true, "x");
    cols.y = resolve(schema.y, header, true, "y");
    cols.speed = resolve(schema.speed, header, false, "speed");
    cols.motion_angle = resolve(schema.motion_angle, header, false, "motion_angle");
    resolved = true;
  };
  if (!schema.has_header) resolve_all(nullptr);

  auto fail = [&](const std::string& msg) {
    if (strict) throw ParseError(line_no, msg);
    result.skipped.push_back({line_no, msg});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto fields = text::split(line, schema.delimiter);
    if (!resolved) {
      resolve_all(&fields);
      continue;
    }
    const int needed = std::max({cols.time, cols.person_id, cols.x, cols.y, cols.speed, cols.motion_angle});
    if (static_cast<int>(fields.size()) <= needed) {
      fail("expected at least " + std::to_string(needed + 1) + " fields, got " +
           std::to_string(fields.size()));
      continue;
    }
    const auto t = text::parse_double(fields[cols.time]);
    const auto x = text::parse_double(fields[cols.x]);
    const auto y = text::parse_double(fields[cols.y]);
    const std::string_view id = fields[cols.person_id];
    if (!t) { fail("unparseable time '" + std::string(fields[cols.time]) + "'"); continue; }
    if (!x) { fail("unparseable x '" + std::string(fields[cols.x]) + "'"); continue; }
    if (!y) { fail("unparseable y '" + std::string(fields[cols.y]) + "'"); continue; }
    if (id.empty()) { fail("empty person_id"); continue; }

    RawRecord rec;
    rec.time = *t * schema.time_scale;
    rec.person_id = std::string(id);
    rec.x = *x * schema.length_scale;
    rec.y = *y * schema.length_scale;
    if (cols.speed >= 0) {
      if (auto v = text::parse_double(fields[cols.speed])) rec.speed = *v * schema.speed_scale;
    }
    if (cols.motion_angle >= 0) {
      if (auto a = text::parse_double(fields[cols.motion_angle])) rec.motion_angle = wrap_angle(*a);
    }
    result.records.push_back(std::move(rec));
  }
  return result;  // an empty stream has no header to check the schema against
}

ResampleResult resample(const std::vector<RawRecord>& records, double dt) {
  if (!(dt > 0.0)) throw ConfigError("resample: dt must be positive");
  ResampleResult out;

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].person_id != records[b].person_id) return records[a].person_id < records[b].person_id;
    return records[a].time < records[b].time;
  });

  // person groups as [begin, end) ranges into `order`
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && records[order[j]].person_id == records[order[i]].person_id) ++j;
    groups.emplace_back(i, j);
    i = j;
  }

  struct PersonOut {
    std::vector<Trajectory> trajectories;
    std::size_t dropped = 0;
    std::size_t discarded = 0;
  };
  std::vector<PersonOut> per_person(groups.size());

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t gi = 0; gi < static_cast<std::ptrdiff_t>(groups.size()); ++gi) {
    const auto [begin, end] = groups[gi];
    PersonOut& po = per_person[gi];
    // slot index -> (deviation, record)
    std::vector<std::pair<long long, std::size_t>> slots;
    std::vector<double> deviations;
    for (std::size_t k = begin; k < end; ++k) {
      const RawRecord& r = records[order[k]];
      if (!std::isfinite(r.time) || !std::isfinite(r.x) || !std::isfinite(r.y)) {
        ++po.discarded;
        continue;
      }
      const long long slot = std::llround(r.time / dt);
      const double dev = std::fabs(r.time - static_cast<double>(slot) * dt);
      if (dev > 0.5 * dt * (1.0 + 1e-12)) {
        ++po.discarded;
        continue;
      }
      if (!slots.empty() && slots.back().first == slot) {
        ++po.discarded;
        if (dev < deviations.back()) {
          slots.back().second = order[k];
          deviations.back() = dev;
        }
        continue;
      }
      slots.emplace_back(slot, order[k]);
      deviations.push_back(dev);
    }

    std::size_t i = 0;
    while (i < slots.size()) {
      std::size_t j = i + 1;
      while (j < slots.size() && slots[j].first == slots[j - 1].first + 1) ++j;
      if (j - i < 2) {
        ++po.dropped;
      } else {
        Trajectory traj;
        traj.person_id = records[slots[i].second].person_id;
        traj.dt = dt;
        traj.states.reserve(j - i);
        for (std::size_t k = i; k < j; ++k) {
          const RawRecord& r = records[slots[k].second];
          traj.states.push_back(AgentState{r.x, r.y, 0.0, 0.0, static_cast<std::int64_t>(slots[k].first)});
        }
        recompute_velocities(traj);
        po.trajectories.push_back(std::move(traj));
      }
      i = j;
    }
  }

  for (auto& po : per_person) {
    out.dropped_tracks += po.dropped;
    out.discarded_records += po.discarded;
    for (auto& t : po.trajectories) out.trajectories.push_back(std::move(t));
  }
  return out;
}

std::vector<PredictionTask> make_tasks(const std::vector<Trajectory>& trajectories,
                                       double observation_seconds, double horizon_seconds, int stride) {
  std::vector<PredictionTask> tasks;
  for (const Trajectory& traj : trajectories) {
    const int obs = seconds_to_steps(observation_seconds, traj.dt, "observation horizon");
    const int horizon = seconds_to_steps(horizon_seconds, traj.dt, "prediction horizon");
    const int step = stride > 0 ? stride : obs + horizon;
    const auto n = static_cast<std::ptrdiff_t>(traj.states.size());
    for (std::ptrdiff_t start = 0; start + obs < n; start += step) {
      PredictionTask task;
      task.observation_steps = obs;
      task.horizon_steps = horizon;
      task.dt = traj.dt;
      task.observed.person_id = traj.person_id;
      task.observed.dt = traj.dt;
      task.ground_truth.person_id = traj.person_id;
      task.ground_truth.dt = traj.dt;
      const auto obs_end = start + obs;
      const auto gt_end = std::min<std::ptrdiff_t>(obs_end + horizon, n);
      task.observed.states.assign(traj.states.begin() + start, traj.states.begin() + obs_end);
      task.ground_truth.states.assign(traj.states.begin() + obs_end, traj.states.begin() + gt_end);
      task.id = traj.person_id + "@" + std::to_string(task.observed.states.back().t);
      tasks.push_back(std::move(task));
    }
  }
  return tasks;
}

RegionMode parse_region_mode(const std::string& s) {
  if (s == "clip") return RegionMode::kClip;
  if (s == "contain") return RegionMode::kContain;
  throw ConfigError("region mode must be 'clip' or 'contain', got '" + s + "'");
}

const char* to_string(RegionMode mode) { return mode == RegionMode::kClip ? "clip" : "contain"; }

std::vector<Trajectory> filter_region(const std::vector<Trajectory>& trajectories, const Region& region,
                                      RegionMode mode) {
  if (!region.valid()) throw ConfigError("region bounds must satisfy xmin < xmax and ymin < ymax");
  std::vector<Trajectory> out;
  for (const Trajectory& traj : trajectories) {
    if (mode == RegionMode::kContain) {
      const bool inside = std::all_of(traj.states.begin(), traj.states.end(),
                                      [&](const AgentState& s) { return region.contains(s.x, s.y); });
      if (inside) out.push_back(traj);
      continue;
    }
    std::size_t i = 0;
    const auto& st = traj.states;
    while (i < st.size()) {
      if (!region.contains(st[i].x, st[i].y)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < st.size() && region.contains(st[j].x, st[j].y)) ++j;
      if (j - i >= 2) {
        Trajectory run{traj.person_id, traj.dt, {st.begin() + i, st.begin() + j}};
        recompute_velocities(run);
        out.push_back(std::move(run));
      }
      i = j;
    }
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<Trajectory>& trajectories, std::int64_t boundary_step,
                           double observation_seconds, double horizon_seconds, int stride) {
  DatasetSplit split;
  std::vector<Trajectory> evaluation;
  for (const Trajectory& traj : trajectories) {
    const auto cut = std::partition_point(traj.states.begin(), traj.states.end(),
                                          [&](const AgentState& s) { return s.t < boundary_step; });
    Trajectory before{traj.person_id, traj.dt, {traj.states.begin(), cut}};
    Trajectory after{traj.person_id, traj.dt, {cut, traj.states.end()}};
    if (before.size() >= 2) {
      recompute_velocities(before);
      split.training.push_back(std::move(before));
    }
    if (after.size() >= 2) {
      recompute_velocities(after);
      evaluation.push_back(std::move(after));
    }
  }
  split.evaluation = make_tasks(evaluation, observation_seconds, horizon_seconds, stride);
  return split;
}

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories,
                            const std::string& header_comment) {
  const double dt = trajectories.empty() ? 1.0 : trajectories.front().dt;
  for (const Trajectory& t : trajectories) {
    if (t.dt != dt) throw DataError("write_trajectories_csv: mixed dt values");
    if (t.person_id.find_first_of(",\n\r#") != std::string::npos)
      throw DataError("person_id '" + t.person_id + "' contains a reserved character");
  }
  for (const auto line : text::split(header_comment, '\n'))
    if (!line.empty()) out << "# " << line << '\n';
  out << "# dt=" << text::format_double(dt) << '\n';
  out << "person_id,t,x,y,omega,nu\n";
  for (const Trajectory& traj : trajectories) {
    for (const AgentState& s : traj.states) {
      out << traj.person_id << ',' << s.t << ',' << text::format_double(s.x) << ','
          << text::format_double(s.y) << ',' << text::format_double(s.omega) << ','
          << text::format_double(s.nu) << '\n';
    }
  }
}

std::vector<Trajectory> read_trajectories_csv(std::istream& in) {
  std::vector<Trajectory> out;
  double dt = 1.0;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto body = text::trim(t.substr(1));
      if (body.starts_with("dt=")) {
        const auto v = text::parse_double(body.substr(3));
        if (!v || !(*v > 0.0)) throw ParseError(line_no, "invalid dt comment");
        dt = *v;
      }
      continue;
    }
    const auto f = text::split(t, ',');
    if (!header_seen) {
      if (f.size() < 6 || f[0] != "person_id" || f[1] != "t" || f[2] != "x" || f[3] != "y" ||
          f[4] != "omega" || f[5] != "nu")
        throw ParseError(line_no, "expected header person_id,t,x,y,omega,nu");
      header_seen = true;
      continue;
    }
    if (f.size() < 6) throw ParseError(line_no, "expected 6 fields");
    const auto step = text::parse_int(f[1]);
    const auto x = text::parse_double(f[2]);
    const auto y = text::parse_double(f[3]);
    const auto omega = text::parse_double(f[4]);
    const auto nu = text::parse_double(f[5]);
    if (!step || !x || !y || !omega || !nu) throw ParseError(line_no, "unparseable numeric field");
    AgentState s;
    try {
      s = AgentState::make(*x, *y, *omega, *nu, *step);
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
    const bool extend = !out.empty() && out.back().person_id == f[0] && out.back().states.back().t + 1 == s.t;
    if (!extend) out.push_back(Trajectory{std::string(f[0]), dt, {}});
    out.back().states.push_back(s);
  }
  for (auto& traj : out) {
    traj.dt = dt;
    validate(traj);
  }
  return out;
}

}  // namespace lace
