#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mfdepth/depth_estimator.hpp"
#include "mfdepth/metrics.hpp"
#include "mfdepth/photometric.hpp"
#include "mfdepth/scene_sim.hpp"

namespace mfdepth {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SamplingStrategy { kVelocity, kFixed, kCascade, kConfidence };
enum class PoseMode { kGroundTruth, kNoisy, kChained };

struct SurfaceConfig {
  std::string kind = "plane";
  double x = 0, y = 0, z = 10;
  double nx = 0, ny = 0, nz = -1;
  double radius = 1;
  double half_u = 0, half_v = 0;  // 0 = unbounded plane
  double vx = 0, vy = 0, vz = 0;
  bool textureless = false;
  double specular = 0;
  double amplitude = 0.35, wavelength = 1.6;
  double checker = 0.1, checker_period = 1.2;
  double base_r = 0.5, base_g = 0.5, base_b = 0.5;
  std::uint32_t seed = 0;  // 0 = derive from the surface index
};

/// One experiment = one flat key=value file. Unknown keys are rejected and
/// all values are validated before a run; the canonical form (every key,
/// defaults included, sorted) is what gets hashed.
struct ExperimentConfig {
  std::uint64_t seed = 1;

  int width = 160, height = 48;
  double focal = 240, cu = -1, cv = -1;  // -1: image center

  double background_depth = 25, depth_floor = 0.5, depth_ceiling = 100;
  double background_amplitude = 0.35, background_wavelength = 2.5;
  bool background_textureless = false;
  std::map<int, SurfaceConfig> surfaces;

  int frames = 3;
  double frame_rate = 10;
  double speed = 4;  // m/s along (dir_x, dir_y, dir_z)
  double dir_x = 1, dir_y = 0, dir_z = 0;

  int depth_bins = 16;
  int groups = 16;
  int channels = 32;
  int radius = 1;
  double beta = 0.15;
  double temperature = 0.05;
  SamplingStrategy sampling = SamplingStrategy::kVelocity;
  double fixed_fraction = 0.5;
  UncertaintyMapping uncertainty = UncertaintyMapping::kNormalized;
  double sigmoid_a = 4.0, sigmoid_b = 2.0;
  bool fusion = true;
  bool fuse_at_full = false;
  VelocityScaleFn velocity_scale = VelocityScaleFn::kIdentity;

  PriorNoiseModel prior_model = PriorNoiseModel::kMultiplicative;
  double prior_sigma = 0.1, prior_bias = 1.2;
  double prior_amplitude = 0.1, prior_wavelength = 16;
  double prior_confidence = 0.5;

  PoseMode pose_mode = PoseMode::kGroundTruth;
  double pose_sigma_translation = 0.0;
  double pose_sigma_rotation_deg = 0.0;

  LossWeights loss;
  EvalOptions eval;

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_text(const std::string& text);

  void set_key(const std::string& key, const std::string& value);
  void validate() const;

  std::string canonical_text() const;
  std::string hash() const;  // FNV-1a 64 of the canonical text, hex

  Scene build_scene() const;
  Trajectory build_trajectory() const;
  Intrinsics build_intrinsics() const;
  UncertaintyOptions uncertainty_options() const;
  PriorNoise prior_noise() const;
};

}  // namespace mfdepth
