#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>

namespace mfdepth {

struct DegenerateProjection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EpipoleDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pinhole intrinsics with a single focal length, in pixels.
/// Convention: x right, y down, z forward; pixel (0,0) at the top-left
/// pixel center.
struct Intrinsics {
  double f = 0.0;
  double cu = 0.0;
  double cv = 0.0;
  int width = 0;
  int height = 0;

  Intrinsics() = default;
  Intrinsics(double f_, double cu_, double cv_, int width_, int height_);

  Eigen::Matrix3d matrix() const;

  /// Intrinsics of the grid downscaled by an integer factor, with pixel
  /// centers aligned: full-res coordinate u maps to (u - (s-1)/2) / s.
  Intrinsics scaled(int factor) const;
};

/// Rigid transform [R | T] mapping source-frame points to target-frame
/// points: X_target = R * X_source + T.
struct Pose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d T = Eigen::Vector3d::Zero();

  Pose() = default;
  Pose(const Eigen::Matrix3d& R_, const Eigen::Vector3d& T_);

  Pose inverse() const;
  /// Composition: (a * b)(X) = a(b(X)).
  Pose operator*(const Pose& other) const;
  Eigen::Vector3d apply(const Eigen::Vector3d& x) const;

  static Pose identity() { return {}; }
  static Pose translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }
};

/// A continuous pixel location, optionally carrying a hypothesized depth.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;  // 0 means "no depth attached"

  bool has_depth() const { return d > 0.0; }
};

struct WarpResult {
  PixelCoord pixel;   // dehomogenized target coordinates, with warped depth
  bool in_bounds = false;   // inside [0,width) x [0,height)
  bool positive_depth = false;

  bool valid() const { return in_bounds && positive_depth; }
};

/// Perspective projection of a camera-frame point. Throws
/// DegenerateProjection for points at or behind the camera plane.
PixelCoord project(const Eigen::Vector3d& point, const Intrinsics& K);

/// Back-project pixel p at depth d, transform by pose, re-project.
/// Out-of-image or behind-camera results are flagged, never clamped.
WarpResult warp_pixel(const PixelCoord& p, const Intrinsics& K,
                      const Pose& pose);

/// Depth of the point in the second frame recovered from a pixel
/// correspondence (u1,v1) -> (u2,.) under pose [R|T] (frame 1 -> frame 2).
/// Only the horizontal coordinate of the second observation is used.
/// Throws EpipoleDegenerate when the disparity denominator vanishes.
double ego_motion_depth(double u1, double v1, double u2, const Intrinsics& K,
                        const Pose& pose);

/// Per-pixel generalized stereo baseline of a camera translating with
/// forward speed vz and yaw angle, evaluated at horizontal pixel u1:
/// frame_rate * (tan(yaw) - (u1-cu)/f) * vz. Signed; magnitude grows with
/// |vz|.
double generalized_baseline(double u1, const Intrinsics& K, double yaw,
                            double vz, double frame_rate);

}  // namespace mfdepth
