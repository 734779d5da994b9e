#include "mfdepth/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace mfdepth {

DepthRange DepthRange::around(double center, double fraction) {
  if (!(center > 0.0))
    throw std::invalid_argument("DepthRange: center must be > 0");
  DepthRange r;
  r.center = center;
  r.fraction = fraction;
  r.d_min = center * (1.0 - fraction);
  r.d_max = center * (1.0 + fraction);
  return r;
}

VelocityEstimate estimate_velocity(const Eigen::Vector3d& translation,
                                   double frame_rate, VelocitySource source) {
  if (!(frame_rate > 0.0))
    throw std::invalid_argument("estimate_velocity: frame_rate must be > 0");
  VelocityEstimate out;
  out.v = frame_rate * translation.norm();
  out.source = source;
  return out;
}

namespace {
double clamp_fraction(double fraction) {
  return std::clamp(fraction, kFractionFloor, kFractionCeil);
}
}  // namespace

DepthRange velocity_range(double center, const VelocityEstimate& v,
                          double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("velocity_range: beta must be > 0");
  return DepthRange::around(center, clamp_fraction(beta * v.scaled()));
}

DepthRange fixed_range(double center, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("fixed_range: fraction must be in (0,1)");
  return DepthRange::around(center, clamp_fraction(fraction));
}

DepthRange cascade_range(const DepthRange& prev) {
  return DepthRange::around(prev.center, clamp_fraction(prev.fraction * 0.5));
}

DepthRange confidence_range(double center, double prior_confidence,
                            double beta) {
  if (!(prior_confidence > 0.0 && prior_confidence <= 1.0))
    throw std::invalid_argument("confidence_range: confidence not in (0,1]");
  const double fraction = beta * (1.0 - prior_confidence + 1e-3);
  return DepthRange::around(center, clamp_fraction(fraction));
}

DepthHypothesisSet inverse_sample(const DepthRange& range, int count) {
  if (count < 2)
    throw std::invalid_argument("inverse_sample: need at least 2 candidates");
  DepthHypothesisSet set;
  set.range = range;
  set.depths.resize(count);
  if (range.d_min == range.d_max) {
    std::fill(set.depths.begin(), set.depths.end(), range.center);
    return set;
  }
  const double inv_min = 1.0 / range.d_min;
  const double inv_max = 1.0 / range.d_max;
  // Endpoints are pinned to the range bounds; 1/(1/x) may be an ulp off.
  set.depths.front() = range.d_max;
  set.depths.back() = range.d_min;
  for (int j = 1; j + 1 < count; ++j) {
    const double inv =
        (inv_min - inv_max) * (static_cast<double>(j) / (count - 1)) + inv_max;
    set.depths[j] = 1.0 / inv;
  }
  return set;
}

}  // namespace mfdepth
