#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lace/core.hpp"
#include "lace/ingest.hpp"
#include "lace/predict.hpp"

namespace lace {

struct Displacement {
  double ade = 0.0;
  double fde = 0.0;
  int steps = 0;  // compared steps
};

/// Per-step L2 errors over the first min(|pred|, |gt|) steps. Both sequences
/// must start at the same step index. Throws DataError when nothing overlaps.
std::vector<double> step_errors(const Trajectory& pred, const Trajectory& gt);

Displacement ade_fde(const Trajectory& pred, const Trajectory& gt);

/// Best ADE and best FDE (minimised independently) among the first k rollouts.
/// Throws DataError if k < 1 or k exceeds the number of rollouts.
Displacement topk(std::span<const RolloutResult> ranked, const Trajectory& gt, int k);

struct TaskScore {
  std::string task_id;
  int run = 0;
  int horizon_steps = 0;  // effective horizon actually compared
  double ade = 0.0;       // rank-1 rollout
  double fde = 0.0;
  double topk_ade = 0.0;
  double topk_fde = 0.0;
  Vec2 gt_final_position;
  std::vector<double> errors;  // rank-1 per-step errors, for horizon curves
};

/// Scores ranked rollouts for one task. The top-k set is the first
/// min(k, |ranked|) rollouts, so a single deterministic baseline rollout
/// scores top-k equal to its own ADE/FDE.
TaskScore score_task(std::span<const RolloutResult> ranked, const PredictionTask& task, int k, int run = 0);

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // sample std over per-run means; 0 for a single run
  std::vector<double> per_run;
};

struct AggregateSummary {
  int runs = 0;
  std::size_t tasks = 0;
  bool single_run = false;
  MetricStats ade, fde, topk_ade, topk_fde;
};

/// Groups scores by run, averages per run, then mean and sample standard
/// deviation across runs. Throws DataError on empty input.
AggregateSummary aggregate(std::span<const TaskScore> scores);

struct HorizonPoint {
  int horizon = 0;  // steps
  double ade = 0.0;  // mean over tasks of the ADE up to this horizon
  double fde = 0.0;  // mean error at this step
  std::size_t count = 0;
};

/// Entries 1..horizon_steps. A task contributes to a point only if its
/// effective horizon reaches it; points without tasks have count 0.
std::vector<HorizonPoint> horizon_curve(std::span<const TaskScore> scores, int horizon_steps);

struct HeatmapGrid {
  double cell_size = 1.0;
  Region bounds;
  int nx = 0;
  int ny = 0;
  std::vector<double> fde_sum;  // row-major, iy * nx + ix
  std::vector<std::size_t> count;
  std::size_t out_of_bounds = 0;

  static HeatmapGrid make(double cell_size, const Region& bounds);
  /// Mean FDE of a cell; nullopt for an empty cell.
  std::optional<double> mean(int ix, int iy) const;
  /// Cell containing p (upper edges closed), or false when outside bounds.
  bool locate(Vec2 p, int* ix, int* iy) const;
  void add(Vec2 p, double fde);
};

/// Bins each task's FDE at its ground-truth final position.
HeatmapGrid heatmap(std::span<const TaskScore> scores, double cell_size, const Region& bounds);

void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid, const std::string& header_comment = {});
/// Reads the output of write_heatmap_csv. Throws ParseError on malformed rows.
HeatmapGrid read_heatmap_csv(std::istream& in);

}  // namespace lace
