#pragma once

#include <cstdint>
#include <vector>

#include "mfdepth/depth_map.hpp"
#include "mfdepth/geometry.hpp"
#include "mfdepth/grid.hpp"

namespace mfdepth {

struct InvalidCameraPlacement : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Band-limited value noise in [0,1], smooth in (x, y) and a pure function
/// of its arguments. Shared by surface textures and the low-frequency prior
/// noise model.
double value_noise(double x, double y, std::uint32_t seed, int octaves);

/// Procedural surface texture: band-limited value noise plus a checker
/// term. `textureless` collapses it to the base color; `specular` adds a
/// view-dependent glint that intentionally violates photometric constancy.
struct TextureSpec {
  float base[3] = {0.5f, 0.5f, 0.5f};
  double amplitude = 0.35;
  double wavelength = 1.6;        // meters of the coarsest noise octave
  double checker = 0.1;
  double checker_period = 1.2;    // meters
  bool textureless = false;
  double specular = 0.0;
  std::uint32_t seed = 0;
};

struct Surface {
  enum class Kind { kPlane, kSphere };

  Kind kind = Kind::kPlane;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // point / center at t=0
  Eigen::Vector3d normal = -Eigen::Vector3d::UnitZ();  // plane only
  double radius = 1.0;                                 // sphere only
  double half_u = 0.0, half_v = 0.0;  // plane extents; <= 0 means unbounded
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // world m/s
  TextureSpec texture;

  bool moving() const { return velocity.squaredNorm() > 0.0; }
};

/// Immutable world description. A backdrop plane at z = background_depth is
/// always present behind the listed surfaces.
struct Scene {
  std::vector<Surface> surfaces;
  double background_depth = 30.0;
  double depth_floor = 0.5;
  double depth_ceiling = 100.0;
  TextureSpec background_texture;

  int add(Surface s);  // returns the surface id (backdrop is id 0)
};

struct Trajectory {
  std::vector<Pose> poses;  // world -> camera, time ordered
  double frame_rate = 10.0;
};

/// Constant-velocity straight-line trajectory with identity orientation.
Trajectory make_linear_trajectory(const Eigen::Vector3d& velocity_mps,
                                  int frame_count, double frame_rate);

struct RenderedFrame {
  Image image;
  GridF depth_gt;       // z-depth, meters
  GridI surface_id;     // 0 = backdrop, i = i-th added surface
  Pose pose;            // world -> camera
  double time = 0.0;    // seconds
};

/// Deterministic ray-cast render at world time `time` (moving surfaces are
/// displaced by velocity * time). Same inputs give bit-identical output.
RenderedFrame render(const Scene& scene, const Intrinsics& camera,
                     const Pose& pose, double time = 0.0);

/// Frames at times k / frame_rate for each trajectory pose.
std::vector<RenderedFrame> make_sequence(const Scene& scene,
                                         const Trajectory& trajectory,
                                         const Intrinsics& camera);

enum class PriorNoiseModel { kMultiplicative, kConstantBias, kLowFrequency };

struct PriorNoise {
  PriorNoiseModel model = PriorNoiseModel::kMultiplicative;
  double sigma = 0.1;       // kMultiplicative: std of the relative error
  double bias = 1.0;        // kConstantBias: prior = bias * gt
  double amplitude = 0.1;   // kLowFrequency: peak relative error
  double wavelength = 16.0; // kLowFrequency: pixels
};

/// Imperfect depth prior manufactured from ground truth; seeded and
/// deterministic, positive everywhere.
DepthMap perturb_prior(const GridF& depth_gt, const PriorNoise& noise,
                       std::uint64_t seed);

}  // namespace mfdepth
