#pragma once

#include "mfdepth/cost_volume.hpp"
#include "mfdepth/depth_map.hpp"
#include "mfdepth/sampling.hpp"

namespace mfdepth {

struct ResolutionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Localmax regression: expected inverse depth over the window of radius r
/// around the probability argmax (ties break to the lowest index), weights
/// w_j = p_j, window truncated at [0, D-1]. A vanishing window weight sum
/// falls back to the argmax depth.
DepthMap localmax_depth(const ProbabilityVolume& prob,
                        const HypothesisVolume& hypotheses, int radius);

/// Natural-log entropy per pixel, with 0*log(0) := 0; clamped into
/// [0, ln D] against float round-off.
GridF probability_entropy(const ProbabilityVolume& prob);

enum class UncertaintyMapping { kNormalized, kAffineSigmoid };

struct UncertaintyOptions {
  UncertaintyMapping mapping = UncertaintyMapping::kNormalized;
  double sigmoid_a = 4.0;
  double sigmoid_b = 2.0;  // nats
};

/// Monotone map from entropy to [0,1]: entropy/ln(D), or
/// sigmoid(a * (entropy - b)).
UncertaintyMap uncertainty_from_entropy(const GridF& entropy, int count,
                                        const UncertaintyOptions& options);

/// D_fuse = U * D_mono + (1 - U) * D_mvs, elementwise.
DepthMap fuse_depth(const DepthMap& mono, const DepthMap& mvs,
                    const UncertaintyMap& u);

/// Bilinear interpolation applied to inverse depth, then inverted; pixel
/// centers of the two grids are aligned. Constant maps are preserved
/// bit-exactly.
DepthMap upsample_depth(const DepthMap& quarter, int factor = 4);

}  // namespace mfdepth
