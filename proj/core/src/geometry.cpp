#include "mfdepth/geometry.hpp"

#include <cmath>

namespace mfdepth {

namespace {
constexpr double kEpipoleEps = 1e-12;
constexpr double kRotationTol = 1e-9;
}  // namespace

Intrinsics::Intrinsics(double f_, double cu_, double cv_, int width_,
                       int height_)
    : f(f_), cu(cu_), cv(cv_), width(width_), height(height_) {
  if (f <= 0.0) throw std::invalid_argument("Intrinsics: focal must be > 0");
  if (cu < 0.0 || cu >= width || cv < 0.0 || cv >= height)
    throw std::invalid_argument("Intrinsics: principal point outside image");
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d K;
  K << f, 0, cu, 0, f, cv, 0, 0, 1;
  return K;
}

Intrinsics Intrinsics::scaled(int factor) const {
  if (factor < 1) throw std::invalid_argument("scaled: factor must be >= 1");
  if (width % factor != 0 || height % factor != 0)
    throw std::invalid_argument("scaled: size not divisible by factor");
  const double off = (factor - 1) * 0.5;
  return Intrinsics(f / factor, (cu - off) / factor, (cv - off) / factor,
                    width / factor, height / factor);
}

Pose::Pose(const Eigen::Matrix3d& R_, const Eigen::Vector3d& T_)
    : R(R_), T(T_) {
  if (((R.transpose() * R) - Eigen::Matrix3d::Identity()).norm() >
      kRotationTol)
    throw std::invalid_argument("Pose: R is not orthonormal");
  if (std::abs(R.determinant() - 1.0) > kRotationTol)
    throw std::invalid_argument("Pose: det(R) != 1");
}

Pose Pose::inverse() const {
  Pose out;
  out.R = R.transpose();
  out.T = -out.R * T;
  return out;
}

Pose Pose::operator*(const Pose& other) const {
  Pose out;
  out.R = R * other.R;
  out.T = R * other.T + T;
  return out;
}

Eigen::Vector3d Pose::apply(const Eigen::Vector3d& x) const {
  return R * x + T;
}

PixelCoord project(const Eigen::Vector3d& point, const Intrinsics& K) {
  const double depth = point.z();
  if (depth <= 0.0)
    throw DegenerateProjection("project: point depth must be positive");
  PixelCoord p;
  p.u = K.f * point.x() / depth + K.cu;
  p.v = K.f * point.y() / depth + K.cv;
  p.d = depth;
  return p;
}

WarpResult warp_pixel(const PixelCoord& p, const Intrinsics& K,
                      const Pose& pose) {
  if (!(p.d > 0.0))
    throw std::invalid_argument("warp_pixel: hypothesis depth must be > 0");

  const Eigen::Vector3d ray((p.u - K.cu) / K.f, (p.v - K.cv) / K.f, 1.0);
  const Eigen::Vector3d warped = pose.apply(ray * p.d);

  WarpResult out;
  out.positive_depth = warped.z() > 0.0;
  if (!out.positive_depth) {
    out.pixel = PixelCoord{0.0, 0.0, warped.z()};
    return out;
  }
  out.pixel.u = K.f * warped.x() / warped.z() + K.cu;
  out.pixel.v = K.f * warped.y() / warped.z() + K.cv;
  out.pixel.d = warped.z();
  out.in_bounds = out.pixel.u >= 0.0 && out.pixel.u < K.width &&
                  out.pixel.v >= 0.0 && out.pixel.v < K.height;
  return out;
}

double ego_motion_depth(double u1, double v1, double u2, const Intrinsics& K,
                        const Pose& pose) {
  const Eigen::Vector3d q((u1 - K.cu) / K.f, (v1 - K.cv) / K.f, 1.0);
  const double r1q = pose.R.row(0).dot(q);
  const double r3q = pose.R.row(2).dot(q);
  const double t1 = pose.T.x();
  const double t3 = pose.T.z();

  const double denom = r3q * (u2 - K.cu) - r1q * K.f;
  if (std::abs(denom) < kEpipoleEps)
    throw EpipoleDegenerate("ego_motion_depth: zero-parallax correspondence");
  return K.f * (r3q * t1 - r1q * t3) / denom;
}

double generalized_baseline(double u1, const Intrinsics& K, double yaw,
                            double vz, double frame_rate) {
  if (!(frame_rate > 0.0))
    throw std::invalid_argument("generalized_baseline: frame_rate must be > 0");
  return frame_rate * (std::tan(yaw) - (u1 - K.cu) / K.f) * vz;
}

}  // namespace mfdepth
