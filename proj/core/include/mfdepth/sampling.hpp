#pragma once

#include <Eigen/Core>
#include <vector>

namespace mfdepth {

/// Fraction clamp realizing the open interval (0, 1): an exact 1 would put
/// d_min at zero and break inverse sampling.
inline constexpr double kFractionFloor = 1e-4;
inline constexpr double kFractionCeil = 1.0 - 1e-4;

/// Symmetric multiplicative depth search interval around a per-pixel center.
struct DepthRange {
  double d_min = 0.0;
  double d_max = 0.0;
  double center = 0.0;
  double fraction = 0.0;

  static DepthRange around(double center, double fraction);
};

/// Ordered depth candidates, descending (index 0 is the farthest); their
/// reciprocals are in arithmetic progression.
struct DepthHypothesisSet {
  std::vector<double> depths;
  DepthRange range;

  int count() const { return static_cast<int>(depths.size()); }
};

enum class VelocitySource { kGroundTruth, kPoseProvider };
enum class VelocityScaleFn { kIdentity, kMedianRatio };

/// Camera speed estimate with the scale transform applied downstream of the
/// pose provider. scaled() is the value the range fraction consumes.
struct VelocityEstimate {
  double v = 0.0;  // m/s, >= 0
  VelocitySource source = VelocitySource::kGroundTruth;
  VelocityScaleFn scale_fn = VelocityScaleFn::kIdentity;
  double scale_ratio = 1.0;  // used by kMedianRatio

  double scaled() const {
    return scale_fn == VelocityScaleFn::kIdentity ? v : v * scale_ratio;
  }
};

/// v = frame_rate * ||T||_2.
VelocityEstimate estimate_velocity(const Eigen::Vector3d& translation,
                                   double frame_rate,
                                   VelocitySource source =
                                       VelocitySource::kGroundTruth);

/// Velocity-guided range: fraction = clamp(beta * scaled_speed). A static
/// camera lands on the clamp floor and the range collapses to the prior.
DepthRange velocity_range(double center, const VelocityEstimate& v,
                          double beta);

/// Range with the fraction forced (the fixed-range ablation baselines).
DepthRange fixed_range(double center, double fraction);

/// Next-stage range with the fraction halved.
DepthRange cascade_range(const DepthRange& prev);

/// Confidence-driven ablation baseline: fraction = clamp(beta * (1 -
/// confidence + 1e-3)).
DepthRange confidence_range(double center, double prior_confidence,
                            double beta);

/// Deterministic inverse sampling:
/// d_j = ((1/d_min - 1/d_max) * j/(D-1) + 1/d_max)^-1, j = 0..D-1.
/// A degenerate range (d_min == d_max) yields D copies of the center.
DepthHypothesisSet inverse_sample(const DepthRange& range, int count);

/// Per-pixel hypothesis sets over a grid of range centers, one shared
/// fraction per frame pair. depths are stored descending per pixel.
struct HypothesisVolume {
  int height = 0;
  int width = 0;
  int count = 0;
  double fraction = 0.0;
  std::vector<double> depths;  // ((y * width + x) * count + j)

  double at(int y, int x, int j) const {
    return depths[(static_cast<std::size_t>(y) * width + x) * count + j];
  }
};

template <typename CenterGrid>
HypothesisVolume sample_hypotheses(const CenterGrid& centers, double fraction,
                                   int count) {
  HypothesisVolume vol;
  vol.height = centers.height();
  vol.width = centers.width();
  vol.count = count;
  vol.fraction = fraction;
  vol.depths.resize(static_cast<std::size_t>(vol.height) * vol.width * count);
  std::size_t offset = 0;
  for (int y = 0; y < vol.height; ++y) {
    for (int x = 0; x < vol.width; ++x, offset += count) {
      const DepthRange range =
          DepthRange::around(static_cast<double>(centers(y, x)), fraction);
      const DepthHypothesisSet set = inverse_sample(range, count);
      std::copy(set.depths.begin(), set.depths.end(),
                vol.depths.begin() + offset);
    }
  }
  return vol;
}

}  // namespace mfdepth
