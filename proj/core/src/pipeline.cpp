#include "mfdepth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "json.hpp"
#include "mfdepth/pfm.hpp"

namespace mfdepth {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 4x4 harmonic block mean: the quarter-res counterpart of interpolating
/// inverse depth.
GridF downsample_depth(const GridF& full) {
  const int hq = full.height() / 4, wq = full.width() / 4;
  GridF out(hq, wq);
  for (int y = 0; y < hq; ++y) {
    for (int x = 0; x < wq; ++x) {
      double inv = 0.0;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          inv += 1.0 / full(y * 4 + r, x * 4 + c);
      out(y, x) = static_cast<float>(16.0 / inv);
    }
  }
  return out;
}

GridF upsample_bilinear(const GridF& quarter, int factor) {
  const int hq = quarter.height(), wq = quarter.width();
  GridF out(hq * factor, wq * factor);
  const double off = (factor - 1) * 0.5;
  for (int y = 0; y < out.height(); ++y) {
    const double sy = std::clamp((y - off) / factor, 0.0, hq - 1.0);
    for (int x = 0; x < out.width(); ++x) {
      const double sx = std::clamp((x - off) / factor, 0.0, wq - 1.0);
      out(y, x) = static_cast<float>(bilinear(quarter, sx, sy));
    }
  }
  return out;
}

Pose perturb_pose(const Pose& pose, double sigma_t, double sigma_r_deg,
                  std::uint64_t seed) {
  if (sigma_t <= 0.0 && sigma_r_deg <= 0.0) return pose;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d dt(gauss(rng), gauss(rng), gauss(rng));
  Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
  const double angle_deg = gauss(rng);
  Pose out = pose;
  out.T += sigma_t * dt;
  if (sigma_r_deg > 0.0 && axis.norm() > 1e-12) {
    const double angle = angle_deg * sigma_r_deg * M_PI / 180.0;
    out.R = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix() *
            pose.R;
  }
  return out;
}

double median_of(const GridF& g) {
  std::vector<float> v(g.data());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

struct PairOutcome {
  FrameResult result;
  PairMaps maps;
};

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void append_metric_row(std::string& csv, const std::string& hash,
                       const std::string& frame, const std::string& output,
                       const MetricReport& m, double fraction,
                       double velocity) {
  csv += hash + "," + frame + "," + output + "," + format_g(m.abs_rel) + "," +
         format_g(m.sq_rel) + "," + format_g(m.rmse) + "," +
         format_g(m.rmse_log) + "," + format_g(m.delta1) + "," +
         format_g(m.delta2) + "," + format_g(m.delta3) + "," +
         std::to_string(m.n_valid) + "," + format_g(m.scale_applied) + "," +
         format_g(fraction) + "," + format_g(velocity) + "\n";
}

nlohmann::ordered_json metric_json(const MetricReport& m) {
  nlohmann::ordered_json j;
  j["abs_rel"] = m.abs_rel;
  j["sq_rel"] = m.sq_rel;
  j["rmse"] = m.rmse;
  j["rmse_log"] = m.rmse_log;
  j["delta1"] = m.delta1;
  j["delta2"] = m.delta2;
  j["delta3"] = m.delta3;
  j["n_valid"] = m.n_valid;
  j["scale_applied"] = m.scale_applied;
  return j;
}

struct MatchOutput {
  DepthMap mvs_q;
  GridF entropy;
  ProbabilityVolume prob;
};

MatchOutput match_pair(const ExperimentConfig& cfg, const FeatureGrid& f_prev,
                       const FeatureGrid& f_cur, const GridF& centers,
                       double fraction, const Intrinsics& Kq,
                       const Pose& pose_rel) {
  const HypothesisVolume hyp =
      sample_hypotheses(centers, fraction, cfg.depth_bins);
  const WarpedVolume vol = build_warped_volume(f_prev, hyp, Kq, pose_rel);
  const CostVolume cost = group_correlation(vol, f_cur, cfg.groups);
  MatchOutput out;
  out.prob = cost_to_probability(cost, cfg.temperature);
  out.mvs_q = localmax_depth(out.prob, hyp, cfg.radius);
  out.entropy = probability_entropy(out.prob);
  return out;
}

PairOutcome process_pair(const ExperimentConfig& cfg,
                         const RenderedFrame& prev, const RenderedFrame& cur,
                         int pair_index, bool keep_maps) {
  PairOutcome o;
  o.result.pair_index = pair_index;

  const Intrinsics K = cfg.build_intrinsics();
  const Intrinsics Kq = K.scaled(4);

  // Pose provider: ground truth between the two frames, optionally
  // perturbed. Chained mode perturbs per-frame increments and composes.
  Pose pose_rel = prev.pose * cur.pose.inverse();
  if (cfg.pose_mode == PoseMode::kNoisy) {
    pose_rel = perturb_pose(pose_rel, cfg.pose_sigma_translation,
                            cfg.pose_sigma_rotation_deg,
                            mix_seed(cfg.seed, 1000 + pair_index));
  } else if (cfg.pose_mode == PoseMode::kChained) {
    pose_rel = perturb_pose(pose_rel, cfg.pose_sigma_translation,
                            cfg.pose_sigma_rotation_deg,
                            mix_seed(cfg.seed, 2000 + pair_index));
  }

  VelocityEstimate vel = estimate_velocity(
      pose_rel.T, cfg.frame_rate,
      cfg.pose_mode == PoseMode::kGroundTruth ? VelocitySource::kGroundTruth
                                              : VelocitySource::kPoseProvider);
  vel.scale_fn = cfg.velocity_scale;

  const GridF gt_q = downsample_depth(cur.depth_gt);
  const DepthMap prior_q_map =
      perturb_prior(gt_q, cfg.prior_noise(), mix_seed(cfg.seed, pair_index));
  DepthMap mono_q = prior_q_map;
  mono_q.resolution = MapResolution::kQuarter;

  const FeatureGrid f_cur = extract_features(cur.image, cfg.channels);
  const FeatureGrid f_prev = extract_features(prev.image, cfg.channels);

  double fraction = 0.0;
  MatchOutput matched;
  switch (cfg.sampling) {
    case SamplingStrategy::kVelocity: {
      if (vel.scale_fn == VelocityScaleFn::kMedianRatio) {
        // Probe pass at identity scale; the ratio between the prior median
        // and the probe median re-scales the speed.
        VelocityEstimate probe = vel;
        probe.scale_fn = VelocityScaleFn::kIdentity;
        const double probe_fraction =
            velocity_range(1.0, probe, cfg.beta).fraction;
        const MatchOutput pass1 = match_pair(cfg, f_prev, f_cur, mono_q.data,
                                             probe_fraction, Kq, pose_rel);
        vel.scale_ratio =
            median_of(mono_q.data) / median_of(pass1.mvs_q.data);
      }
      fraction = velocity_range(1.0, vel, cfg.beta).fraction;
      matched = match_pair(cfg, f_prev, f_cur, mono_q.data, fraction, Kq,
                           pose_rel);
      break;
    }
    case SamplingStrategy::kFixed: {
      fraction = fixed_range(1.0, cfg.fixed_fraction).fraction;
      matched = match_pair(cfg, f_prev, f_cur, mono_q.data, fraction, Kq,
                           pose_rel);
      break;
    }
    case SamplingStrategy::kCascade: {
      // Coarse-to-fine: second stage recenters on the first localmax depth
      // with the fraction halved.
      const double coarse = fixed_range(1.0, cfg.fixed_fraction).fraction;
      const MatchOutput pass1 =
          match_pair(cfg, f_prev, f_cur, mono_q.data, coarse, Kq, pose_rel);
      fraction = cascade_range(DepthRange::around(1.0, coarse)).fraction;
      matched = match_pair(cfg, f_prev, f_cur, pass1.mvs_q.data, fraction, Kq,
                           pose_rel);
      break;
    }
    case SamplingStrategy::kConfidence: {
      fraction =
          confidence_range(1.0, cfg.prior_confidence, cfg.beta).fraction;
      matched = match_pair(cfg, f_prev, f_cur, mono_q.data, fraction, Kq,
                           pose_rel);
      break;
    }
  }

  o.result.velocity = vel.scaled();
  o.result.fraction = fraction;

  const UncertaintyMap uncertainty = uncertainty_from_entropy(
      matched.entropy, cfg.depth_bins, cfg.uncertainty_options());

  DepthMap fused_q;
  if (cfg.fusion && !cfg.fuse_at_full) {
    fused_q = fuse_depth(mono_q, matched.mvs_q, uncertainty);
  } else {
    fused_q = matched.mvs_q;
    fused_q.kind = DepthKind::kFused;
  }

  DepthMap mono_full = upsample_depth(mono_q, 4);
  mono_full.kind = DepthKind::kMono;
  DepthMap mvs_full = upsample_depth(matched.mvs_q, 4);
  DepthMap fused_full;
  if (cfg.fusion && cfg.fuse_at_full) {
    UncertaintyMap u_full;
    u_full.data = upsample_bilinear(uncertainty.data, 4);
    fused_full = fuse_depth(mono_full, mvs_full, u_full);
  } else {
    fused_full = upsample_depth(fused_q, 4);
    fused_full.kind = DepthKind::kFused;
  }

  o.result.mono = evaluate(mono_full.data, cur.depth_gt, nullptr, cfg.eval);
  o.result.mvs = evaluate(mvs_full.data, cur.depth_gt, nullptr, cfg.eval);
  o.result.fused = evaluate(fused_full.data, cur.depth_gt, nullptr, cfg.eval);
  o.result.ok = true;

  if (keep_maps) {
    o.maps.mono_q = std::move(mono_q);
    o.maps.mvs_q = std::move(matched.mvs_q);
    o.maps.fused_q = std::move(fused_q);
    o.maps.mono_full = std::move(mono_full);
    o.maps.mvs_full = std::move(mvs_full);
    o.maps.fused_full = std::move(fused_full);
    o.maps.uncertainty = uncertainty;
    o.maps.entropy = matched.entropy;
    o.maps.depth_gt = cur.depth_gt;
    o.maps.surface_id = cur.surface_id;
  }
  return o;
}

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&next, count, &fn] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

MetricReport aggregate_reports(const std::vector<MetricReport>& reports) {
  MetricReport agg;
  if (reports.empty()) return agg;
  for (const MetricReport& m : reports) {
    agg.abs_rel += m.abs_rel;
    agg.sq_rel += m.sq_rel;
    agg.rmse += m.rmse;
    agg.rmse_log += m.rmse_log;
    agg.delta1 += m.delta1;
    agg.delta2 += m.delta2;
    agg.delta3 += m.delta3;
    agg.n_valid += m.n_valid;
    agg.scale_applied += m.scale_applied;
  }
  const double n = static_cast<double>(reports.size());
  agg.abs_rel /= n;
  agg.sq_rel /= n;
  agg.rmse /= n;
  agg.rmse_log /= n;
  agg.delta1 /= n;
  agg.delta2 /= n;
  agg.delta3 /= n;
  agg.scale_applied /= n;
  return agg;
}

RunRecord run_pipeline(const ExperimentConfig& config, bool keep_maps,
                       int jobs) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  RunRecord record;
  record.config_hash = config.hash();
  record.seed = config.seed;

  const Scene scene = config.build_scene();
  const Trajectory trajectory = config.build_trajectory();
  const Intrinsics K = config.build_intrinsics();
  const std::vector<RenderedFrame> rendered =
      make_sequence(scene, trajectory, K);

  const int pair_count = static_cast<int>(rendered.size()) - 1;
  std::vector<PairOutcome> outcomes(pair_count);
  parallel_for(pair_count, jobs, [&](int i) {
    const int t = i + 1;
    try {
      outcomes[i] =
          process_pair(config, rendered[t - 1], rendered[t], t, keep_maps);
    } catch (const std::exception& e) {
      outcomes[i].result.pair_index = t;
      outcomes[i].result.ok = false;
      outcomes[i].result.diagnostic = e.what();
    }
  });

  std::vector<MetricReport> mono, mvs, fused;
  for (PairOutcome& o : outcomes) {
    if (o.result.ok) {
      mono.push_back(o.result.mono);
      mvs.push_back(o.result.mvs);
      fused.push_back(o.result.fused);
    } else {
      ++record.failed_pairs;
    }
    record.frames.push_back(std::move(o.result));
    if (keep_maps) record.maps.push_back(std::move(o.maps));
  }
  record.agg_mono = aggregate_reports(mono);
  record.agg_mvs = aggregate_reports(mvs);
  record.agg_fused = aggregate_reports(fused);

  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return record;
}

void write_metrics_csv(const RunRecord& record, const std::string& path) {
  std::string csv =
      "config_hash,frame,output,abs_rel,sq_rel,rmse,rmse_log,delta1,delta2,"
      "delta3,n_valid,scale,fraction,velocity\n";
  for (const FrameResult& f : record.frames) {
    if (!f.ok) continue;
    const std::string frame = std::to_string(f.pair_index);
    append_metric_row(csv, record.config_hash, frame, "mono", f.mono,
                      f.fraction, f.velocity);
    append_metric_row(csv, record.config_hash, frame, "mvs", f.mvs, f.fraction,
                      f.velocity);
    append_metric_row(csv, record.config_hash, frame, "fused", f.fused,
                      f.fraction, f.velocity);
  }
  append_metric_row(csv, record.config_hash, "all", "mono", record.agg_mono, 0,
                    0);
  append_metric_row(csv, record.config_hash, "all", "mvs", record.agg_mvs, 0,
                    0);
  append_metric_row(csv, record.config_hash, "all", "fused", record.agg_fused,
                    0, 0);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
  out << csv;
}

void write_summary_json(const RunRecord& record,
                        const ExperimentConfig& config,
                        const std::string& path) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["config_hash"] = record.config_hash;
  j["seed"] = record.seed;
  j["failed_pairs"] = record.failed_pairs;

  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const FrameResult& f : record.frames) {
    nlohmann::ordered_json p;
    p["pair_index"] = f.pair_index;
    p["ok"] = f.ok;
    if (!f.ok) {
      p["diagnostic"] = f.diagnostic;
    } else {
      p["velocity"] = f.velocity;
      p["fraction"] = f.fraction;
      p["mono"] = metric_json(f.mono);
      p["mvs"] = metric_json(f.mvs);
      p["fused"] = metric_json(f.fused);
    }
    pairs.push_back(std::move(p));
  }
  j["pairs"] = std::move(pairs);
  j["aggregate"]["mono"] = metric_json(record.agg_mono);
  j["aggregate"]["mvs"] = metric_json(record.agg_mvs);
  j["aggregate"]["fused"] = metric_json(record.agg_fused);
  j["config"] = config.canonical_text();

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("write_summary_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

std::vector<std::string> write_run_outputs(const RunRecord& record,
                                           const ExperimentConfig& config,
                                           const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> paths;

  auto emit = [&paths](const std::string& p) { paths.push_back(p); };

  for (std::size_t i = 0; i < record.maps.size(); ++i) {
    if (!record.frames[i].ok) continue;
    const PairMaps& m = record.maps[i];
    char tag[16];
    std::snprintf(tag, sizeof(tag), "%03d", record.frames[i].pair_index);
    const std::string base = out_dir + "/";
    export_pfm(m.mono_full.data, base + "depth_mono_" + tag + ".pfm");
    emit(base + "depth_mono_" + tag + ".pfm");
    export_pfm(m.mvs_full.data, base + "depth_mvs_" + tag + ".pfm");
    emit(base + "depth_mvs_" + tag + ".pfm");
    export_pfm(m.fused_full.data, base + "depth_fused_" + tag + ".pfm");
    emit(base + "depth_fused_" + tag + ".pfm");
    export_pfm(m.uncertainty.data, base + "uncertainty_" + tag + ".pfm");
    emit(base + "uncertainty_" + tag + ".pfm");
    export_pfm(m.depth_gt, base + "depth_gt_" + tag + ".pfm");
    emit(base + "depth_gt_" + tag + ".pfm");
  }

  write_metrics_csv(record, out_dir + "/metrics.csv");
  emit(out_dir + "/metrics.csv");
  write_summary_json(record, config, out_dir + "/summary.json");
  emit(out_dir + "/summary.json");
  return paths;
}

const char* ablation_axis_name(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kBins: return "bins";
    case AblationAxis::kStrategy: return "strategy";
    case AblationAxis::kBeta: return "beta";
    case AblationAxis::kFusion: return "fusion";
  }
  return "unknown";
}

std::optional<AblationAxis> ablation_axis_from_name(const std::string& name) {
  if (name == "bins") return AblationAxis::kBins;
  if (name == "strategy") return AblationAxis::kStrategy;
  if (name == "beta") return AblationAxis::kBeta;
  if (name == "fusion") return AblationAxis::kFusion;
  return std::nullopt;
}

AblationTable run_ablation(const ExperimentConfig& config, AblationAxis axis,
                           int jobs) {
  config.validate();

  struct Cell {
    std::string label;
    ExperimentConfig cfg;
    bool is_default;
  };
  std::vector<Cell> cells;
  const std::string base_hash = config.hash();

  auto push = [&cells, &base_hash](const std::string& label,
                                   ExperimentConfig cfg) {
    const bool is_default = cfg.hash() == base_hash;
    cells.push_back({label, std::move(cfg), is_default});
  };

  switch (axis) {
    case AblationAxis::kBins: {
      for (const int bins : {8, 16, 32, 48}) {
        ExperimentConfig c = config;
        c.depth_bins = bins;
        push("bins=" + std::to_string(bins), std::move(c));
      }
      break;
    }
    case AblationAxis::kStrategy: {
      {
        ExperimentConfig c = config;
        c.sampling = SamplingStrategy::kFixed;
        c.fixed_fraction = 0.5;
        push("fixed_half", std::move(c));
      }
      {
        ExperimentConfig c = config;
        c.sampling = SamplingStrategy::kFixed;
        c.fixed_fraction = 0.25;
        push("fixed_quarter", std::move(c));
      }
      {
        ExperimentConfig c = config;
        c.sampling = SamplingStrategy::kCascade;
        c.fixed_fraction = 0.5;
        push("cascade", std::move(c));
      }
      {
        ExperimentConfig c = config;
        c.sampling = SamplingStrategy::kConfidence;
        push("confidence", std::move(c));
      }
      for (const double beta : {0.1, 0.15, 0.2}) {
        ExperimentConfig c = config;
        c.sampling = SamplingStrategy::kVelocity;
        c.beta = beta;
        push("velocity_beta=" + format_g(beta), std::move(c));
      }
      break;
    }
    case AblationAxis::kBeta: {
      for (const double beta : {0.1, 0.15, 0.2}) {
        ExperimentConfig c = config;
        c.beta = beta;
        push("beta=" + format_g(beta), std::move(c));
      }
      break;
    }
    case AblationAxis::kFusion: {
      {
        ExperimentConfig c = config;
        c.fusion = false;
        push("unfused", std::move(c));
      }
      {
        ExperimentConfig c = config;
        c.fusion = true;
        push("fused", std::move(c));
      }
      break;
    }
  }

  // The table always anchors on the default configuration row.
  if (std::none_of(cells.begin(), cells.end(),
                   [](const Cell& c) { return c.is_default; })) {
    push("default", config);
  }

  AblationTable table;
  table.axis = axis;
  table.base_config_hash = base_hash;
  table.rows.resize(cells.size());

  parallel_for(static_cast<int>(cells.size()), jobs, [&](int i) {
    const Cell& cell = cells[i];
    const RunRecord record = run_pipeline(cell.cfg, false, 1);
    AblationRow row;
    row.label = cell.label;
    row.is_default = cell.is_default;
    row.fused = record.agg_fused;
    row.memory_floats = (cell.cfg.width / 4.0) * (cell.cfg.height / 4.0) *
                        (cell.cfg.channels + cell.cfg.groups) *
                        cell.cfg.depth_bins;
    table.rows[i] = std::move(row);
  });
  return table;
}

void write_ablation_csv(const AblationTable& table, const std::string& path) {
  std::string csv =
      "axis,label,is_default,abs_rel,sq_rel,rmse,rmse_log,delta1,"
      "memory_floats\n";
  for (const AblationRow& row : table.rows) {
    csv += std::string(ablation_axis_name(table.axis)) + "," + row.label +
           "," + (row.is_default ? "1" : "0") + "," +
           format_g(row.fused.abs_rel) + "," + format_g(row.fused.sq_rel) +
           "," + format_g(row.fused.rmse) + "," +
           format_g(row.fused.rmse_log) + "," + format_g(row.fused.delta1) +
           "," + format_g(row.memory_floats) + "\n";
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("write_ablation_csv: cannot open " + path);
  out << csv;
}

void write_eval_csv(const std::vector<EvalRow>& rows,
                    const MetricReport& aggregate, const std::string& path) {
  std::string csv =
      "pred,gt,abs_rel,sq_rel,rmse,rmse_log,delta1,delta2,delta3,n_valid,"
      "scale\n";
  auto append = [&csv](const std::string& pred, const std::string& gt,
                       const MetricReport& m) {
    csv += pred + "," + gt + "," + format_g(m.abs_rel) + "," +
           format_g(m.sq_rel) + "," + format_g(m.rmse) + "," +
           format_g(m.rmse_log) + "," + format_g(m.delta1) + "," +
           format_g(m.delta2) + "," + format_g(m.delta3) + "," +
           std::to_string(m.n_valid) + "," + format_g(m.scale_applied) + "\n";
  };
  for (const EvalRow& row : rows) append(row.pred_path, row.gt_path, row.report);
  append("aggregate", "", aggregate);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_eval_csv: cannot open " + path);
  out << csv;
}

}  // namespace mfdepth
