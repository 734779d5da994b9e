#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfdepth/config.hpp"

namespace mfdepth {

/// Per-pair maps kept in memory when requested (tests, visual export).
struct PairMaps {
  DepthMap mono_q, mvs_q, fused_q;
  DepthMap mono_full, mvs_full, fused_full;
  UncertaintyMap uncertainty;
  GridF entropy;
  GridF depth_gt;       // full resolution, current frame
  GridI surface_id;     // current frame
};

struct FrameResult {
  int pair_index = 0;   // index of the current frame t; pair is (t-1, t)
  bool ok = false;
  std::string diagnostic;
  double velocity = 0.0;  // scaled speed feeding the range fraction
  double fraction = 0.0;  // effective range fraction for this pair
  MetricReport mono, mvs, fused;
};

struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<FrameResult> frames;
  MetricReport agg_mono, agg_mvs, agg_fused;  // means over successful pairs
  int failed_pairs = 0;
  double wall_seconds = 0.0;  // reported on stdout only, never serialized
  std::vector<PairMaps> maps;  // filled when keep_maps
};

/// Full pipeline over every consecutive frame pair: velocity -> range ->
/// hypotheses -> features -> warp -> correlate -> probability -> localmax ->
/// entropy -> uncertainty -> fuse -> upsample -> evaluate. A module error
/// aborts the pair (diagnostic recorded), not the run.
RunRecord run_pipeline(const ExperimentConfig& config, bool keep_maps = false,
                       int jobs = 1);

/// Writes depth/uncertainty PFMs, metrics.csv and summary.json into out_dir
/// (created if missing). The record must have been produced with keep_maps.
std::vector<std::string> write_run_outputs(const RunRecord& record,
                                           const ExperimentConfig& config,
                                           const std::string& out_dir);

enum class AblationAxis { kBins, kStrategy, kBeta, kFusion };

struct AblationRow {
  std::string label;
  bool is_default = false;
  MetricReport fused;
  double memory_floats = 0.0;  // analytic H/4 * W/4 * (C+G) * D volume size
};

struct AblationTable {
  AblationAxis axis;
  std::string base_config_hash;
  std::vector<AblationRow> rows;
};

/// Sweeps one axis, holding everything else at the given config. The row
/// matching the unmodified configuration is always present and flagged.
AblationTable run_ablation(const ExperimentConfig& config, AblationAxis axis,
                           int jobs = 1);

void write_ablation_csv(const AblationTable& table, const std::string& path);
void write_metrics_csv(const RunRecord& record, const std::string& path);
void write_summary_json(const RunRecord& record, const ExperimentConfig& config,
                        const std::string& path);

/// eval subcommand: per-pair rows plus an aggregate row.
struct EvalRow {
  std::string pred_path, gt_path;
  MetricReport report;
};
void write_eval_csv(const std::vector<EvalRow>& rows,
                    const MetricReport& aggregate, const std::string& path);

MetricReport aggregate_reports(const std::vector<MetricReport>& reports);

const char* ablation_axis_name(AblationAxis axis);
std::optional<AblationAxis> ablation_axis_from_name(const std::string& name);

}  // namespace mfdepth
