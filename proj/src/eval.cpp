#include "lace/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "lace/error.hpp"
#include "lace/text.hpp"

namespace lace {

std::vector<double> step_errors(const Trajectory& pred, const Trajectory& gt) {
  const std::size_t n = std::min(pred.size(), gt.size());
  if (n == 0) throw DataError("ade_fde: no comparable steps");
  if (pred.states.front().t != gt.states.front().t)
    throw DataError("ade_fde: prediction starts at step " + std::to_string(pred.states.front().t) +
                    ", ground truth at " + std::to_string(gt.states.front().t));
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i)
    e[i] = std::hypot(pred.states[i].x - gt.states[i].x, pred.states[i].y - gt.states[i].y);
  return e;
}

namespace {

Displacement summarize(const std::vector<double>& e) {
  double sum = 0.0;
  for (double v : e) sum += v;
  return {sum / static_cast<double>(e.size()), e.back(), static_cast<int>(e.size())};
}

}  // namespace

Displacement ade_fde(const Trajectory& pred, const Trajectory& gt) { return summarize(step_errors(pred, gt)); }

Displacement topk(std::span<const RolloutResult> ranked, const Trajectory& gt, int k) {
  if (k < 1 || ranked.empty()) throw DataError("topk: empty candidate set");
  if (static_cast<std::size_t>(k) > ranked.size())
    throw DataError("topk: k = " + std::to_string(k) + " exceeds " + std::to_string(ranked.size()) + " rollouts");
  Displacement best = ade_fde(ranked[0].trajectory, gt);
  for (int i = 1; i < k; ++i) {
    const Displacement d = ade_fde(ranked[i].trajectory, gt);
    best.ade = std::min(best.ade, d.ade);
    best.fde = std::min(best.fde, d.fde);
  }
  return best;
}

TaskScore score_task(std::span<const RolloutResult> ranked, const PredictionTask& task, int k, int run) {
  if (ranked.empty()) throw DataError("score: task '" + task.id + "' has no rollouts");
  if (task.ground_truth.empty()) throw DataError("score: task '" + task.id + "' has no ground truth");
  TaskScore s;
  s.task_id = task.id;
  s.run = run;
  s.errors = step_errors(ranked[0].trajectory, task.ground_truth);
  const Displacement top1 = summarize(s.errors);
  s.horizon_steps = top1.steps;
  s.ade = top1.ade;
  s.fde = top1.fde;
  const int kk = std::min<int>(k, static_cast<int>(ranked.size()));
  const Displacement best = topk(ranked, task.ground_truth, kk);
  s.topk_ade = best.ade;
  s.topk_fde = best.fde;
  s.gt_final_position = task.ground_truth.states[static_cast<std::size_t>(top1.steps) - 1].position();
  return s;
}

namespace {

MetricStats stats(std::vector<double> per_run) {
  MetricStats m;
  double sum = 0.0;
  for (double v : per_run) sum += v;
  m.mean = sum / static_cast<double>(per_run.size());
  if (per_run.size() > 1) {
    double ss = 0.0;
    for (double v : per_run) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(per_run.size() - 1));
  }
  m.per_run = std::move(per_run);
  return m;
}

}  // namespace

AggregateSummary aggregate(std::span<const TaskScore> scores) {
  if (scores.empty()) throw DataError("aggregate: no runs");
  struct Acc {
    double ade = 0, fde = 0, tade = 0, tfde = 0;
    std::size_t n = 0;
  };
  std::map<int, Acc> runs;
  for (const TaskScore& s : scores) {
    Acc& a = runs[s.run];
    a.ade += s.ade;
    a.fde += s.fde;
    a.tade += s.topk_ade;
    a.tfde += s.topk_fde;
    ++a.n;
  }
  std::vector<double> ade, fde, tade, tfde;
  for (const auto& [id, a] : runs) {
    const double n = static_cast<double>(a.n);
    ade.push_back(a.ade / n);
    fde.push_back(a.fde / n);
    tade.push_back(a.tade / n);
    tfde.push_back(a.tfde / n);
  }
  AggregateSummary out;
  out.runs = static_cast<int>(runs.size());
  out.tasks = scores.size();
  out.single_run = runs.size() == 1;
  out.ade = stats(std::move(ade));
  out.fde = stats(std::move(fde));
  out.topk_ade = stats(std::move(tade));
  out.topk_fde = stats(std::move(tfde));
  return out;
}

std::vector<HorizonPoint> horizon_curve(std::span<const TaskScore> scores, int horizon_steps) {
  std::vector<HorizonPoint> curve(static_cast<std::size_t>(std::max(horizon_steps, 0)));
  std::vector<double> ade_sum(curve.size(), 0.0);
  std::vector<double> fde_sum(curve.size(), 0.0);
  for (const TaskScore& s : scores) {
    double running = 0.0;
    const std::size_t n = std::min(s.errors.size(), curve.size());
    for (std::size_t h = 0; h < n; ++h) {
      running += s.errors[h];
      ade_sum[h] += running / static_cast<double>(h + 1);
      fde_sum[h] += s.errors[h];
      ++curve[h].count;
    }
  }
  for (std::size_t h = 0; h < curve.size(); ++h) {
    curve[h].horizon = static_cast<int>(h + 1);
    if (curve[h].count > 0) {
      curve[h].ade = ade_sum[h] / static_cast<double>(curve[h].count);
      curve[h].fde = fde_sum[h] / static_cast<double>(curve[h].count);
    }
  }
  return curve;
}

HeatmapGrid HeatmapGrid::make(double cell_size, const Region& bounds) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ConfigError("heatmap: cell_size must be positive");
  if (!bounds.valid()) throw ConfigError("heatmap: bounds must satisfy xmin < xmax and ymin < ymax");
  HeatmapGrid g;
  g.cell_size = cell_size;
  g.bounds = bounds;
  g.nx = std::max(1, static_cast<int>(std::ceil((bounds.xmax - bounds.xmin) / cell_size - 1e-9)));
  g.ny = std::max(1, static_cast<int>(std::ceil((bounds.ymax - bounds.ymin) / cell_size - 1e-9)));
  g.fde_sum.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
  g.count.assign(g.fde_sum.size(), 0);
  return g;
}

std::optional<double> HeatmapGrid::mean(int ix, int iy) const {
  const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
  if (count[i] == 0) return std::nullopt;
  return fde_sum[i] / static_cast<double>(count[i]);
}

bool HeatmapGrid::locate(Vec2 p, int* ix, int* iy) const {
  if (!bounds.contains(p.x, p.y)) return false;
  *ix = std::min(nx - 1, static_cast<int>(std::floor((p.x - bounds.xmin) / cell_size)));
  *iy = std::min(ny - 1, static_cast<int>(std::floor((p.y - bounds.ymin) / cell_size)));
  return true;
}

void HeatmapGrid::add(Vec2 p, double fde) {
  int ix = 0;
  int iy = 0;
  if (!locate(p, &ix, &iy)) {
    ++out_of_bounds;
    return;
  }
  const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
  fde_sum[i] += fde;
  ++count[i];
}

HeatmapGrid heatmap(std::span<const TaskScore> scores, double cell_size, const Region& bounds) {
  HeatmapGrid g = HeatmapGrid::make(cell_size, bounds);
  for (const TaskScore& s : scores) g.add(s.gt_final_position, s.fde);
  return g;
}

void write_heatmap_csv(std::ostream& out, const HeatmapGrid& g, const std::string& header_comment) {
  using text::format_double;
  for (const auto line : text::split(header_comment, '\n'))
    if (!line.empty()) out << "# " << line << "\n";
  out << "# grid cell_size=" << format_double(g.cell_size) << " xmin=" << format_double(g.bounds.xmin)
      << " xmax=" << format_double(g.bounds.xmax) << " ymin=" << format_double(g.bounds.ymin)
      << " ymax=" << format_double(g.bounds.ymax) << " out_of_bounds=" << g.out_of_bounds << "\n";
  out << "ix,iy,x0,y0,x1,y1,count,mean_fde,fde_sum\n";
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * g.nx + ix;
      const double x0 = g.bounds.xmin + ix * g.cell_size;
      const double y0 = g.bounds.ymin + iy * g.cell_size;
      out << ix << ',' << iy << ',' << format_double(x0) << ',' << format_double(y0) << ','
          << format_double(x0 + g.cell_size) << ',' << format_double(y0 + g.cell_size) << ',' << g.count[i] << ',';
      if (const auto m = g.mean(ix, iy)) out << format_double(*m);
      out << ',' << format_double(g.fde_sum[i]) << '\n';
    }
  }
}

HeatmapGrid read_heatmap_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<HeatmapGrid> grid;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = text::trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      const std::string_view rest = text::trim(body.substr(1));
      if (!rest.starts_with("grid ")) continue;
      double cell = 0.0;
      Region r;
      long long oob = 0;
      for (std::string_view kv : text::split(rest.substr(5), ' ')) {
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        const std::string_view key = kv.substr(0, eq);
        const auto v = text::parse_double(kv.substr(eq + 1));
        if (!v) throw ParseError(line_no, "bad grid value '" + std::string(kv) + "'");
        if (key == "cell_size") cell = *v;
        else if (key == "xmin") r.xmin = *v;
        else if (key == "xmax") r.xmax = *v;
        else if (key == "ymin") r.ymin = *v;
        else if (key == "ymax") r.ymax = *v;
        else if (key == "out_of_bounds") oob = static_cast<long long>(*v);
      }
      grid = HeatmapGrid::make(cell, r);
      grid->out_of_bounds = static_cast<std::size_t>(oob);
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    if (!grid) throw ParseError(line_no, "heatmap row before '# grid' line");
    const auto f = text::split(body, ',');
    if (f.size() != 9) throw ParseError(line_no, "expected 9 fields, got " + std::to_string(f.size()));
    const auto ix = text::parse_int(f[0]);
    const auto iy = text::parse_int(f[1]);
    const auto count = text::parse_int(f[6]);
    const auto sum = text::parse_double(f[8]);
    if (!ix || !iy || !count || !sum || *ix < 0 || *iy < 0 || *ix >= grid->nx || *iy >= grid->ny || *count < 0)
      throw ParseError(line_no, "malformed heatmap cell");
    const std::size_t i = static_cast<std::size_t>(*iy) * grid->nx + static_cast<std::size_t>(*ix);
    grid->count[i] = static_cast<std::size_t>(*count);
    grid->fde_sum[i] = *sum;
  }
  if (!grid) throw DataError("heatmap CSV has no '# grid' line");
  return *grid;
}

}  // namespace lace
