#pragma once

#include <vector>

#include "mfdepth/depth_map.hpp"
#include "mfdepth/geometry.hpp"
#include "mfdepth/grid.hpp"

namespace mfdepth {

struct NoValidPixels : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynthesizedImage {
  Image image;
  GridB validity;  // invalid pixels are excluded from every aggregate
};

/// Resample `src` at the projection of the target-frame depth through
/// `pose` (target -> source). Out-of-bounds or behind-camera pixels are
/// flagged invalid.
SynthesizedImage synthesize(const Image& src, const DepthMap& depth,
                            const Intrinsics& K, const Pose& pose);

/// pe = 0.85 * (1 - SSIM)/2 + 0.15 * L1, with 3x3 mean-filter SSIM
/// (c1 = 0.01^2, c2 = 0.03^2) and both terms averaged over color channels.
GridF photometric_error(const Image& a, const Image& b);

/// Mean over pixels (valid in every view) of the per-pixel minimum pe
/// between the target and each synthesized view.
double min_reprojection_loss(const Image& target,
                             const std::vector<SynthesizedImage>& views);

/// Edge-aware smoothness of mean-normalized inverse depth:
/// mean(|dx d*| e^-|dx I|) + mean(|dy d*| e^-|dy I|).
double smoothness_loss(const DepthMap& depth, const Image& image);

struct LossWeights {
  double lambda_mono = 1.0;
  double lambda_mvs = 1.0;
  double lambda_fused = 1.0;
  double gamma = 0.001;
};

struct LossBreakdown {
  double reprojection = 0.0;  // lambda-weighted sum of the L_r terms
  double smoothness = 0.0;    // lambda-weighted sum of the L_s terms
  double mono = 0.0;          // L(D) = L_r + gamma * L_s per depth source
  double mvs = 0.0;
  double fused = 0.0;
  double total = 0.0;
};

/// A source view with the pose mapping target-frame points into it.
struct SourceView {
  const Image* image = nullptr;
  Pose pose;
};

/// Three-part objective over {mono, mvs, fused} full-resolution depths; a
/// loss-landscape oracle, not a training loop.
LossBreakdown composite_loss(const Image& target,
                             const std::vector<SourceView>& sources,
                             const DepthMap& mono, const DepthMap& mvs,
                             const DepthMap& fused, const Intrinsics& K,
                             const LossWeights& weights);

}  // namespace mfdepth
