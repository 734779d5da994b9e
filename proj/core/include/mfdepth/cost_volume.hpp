#pragma once

#include <cstdint>
#include <vector>

#include "mfdepth/geometry.hpp"
#include "mfdepth/grid.hpp"
#include "mfdepth/sampling.hpp"

namespace mfdepth {

/// Quarter-resolution feature planes extracted from an image, per-channel
/// normalized to zero mean / unit variance over the frame.
struct FeatureGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;  // ((y * width + x) * channels + c)
  bool textureless = false; // every channel was degenerate

  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// Previous-frame features resampled at every depth hypothesis.
struct WarpedVolume {
  int height = 0;
  int width = 0;
  int channels = 0;
  int count = 0;
  // (((y * width + x) * count + j) * channels + c); invalid cells hold zeros.
  std::vector<float> data;
  std::vector<std::uint8_t> validity;  // ((y * width + x) * count + j)

  bool valid(int y, int x, int j) const {
    return validity[(static_cast<std::size_t>(y) * width + x) * count + j] !=
           0;
  }
};

/// Per-pixel G x D group similarities.
struct CostVolume {
  int height = 0;
  int width = 0;
  int groups = 0;
  int count = 0;
  // (((y * width + x) * groups + g) * count + j)
  std::vector<float> data;

  float at(int y, int x, int g, int j) const {
    return data[((static_cast<std::size_t>(y) * width + x) * groups + g) *
                    count + j];
  }
};

/// Per-pixel distribution over the D hypotheses.
struct ProbabilityVolume {
  int height = 0;
  int width = 0;
  int count = 0;
  std::vector<float> data;  // ((y * width + x) * count + j)
  std::vector<std::uint8_t> low_evidence;  // per pixel

  float at(int y, int x, int j) const {
    return data[(static_cast<std::size_t>(y) * width + x) * count + j];
  }
};

inline constexpr int kFeatureChannels = 32;

/// Hand-crafted stand-in for a learned encoder. Each feature pixel summarizes
/// a 4x4 block: variance-normalized block intensities (16), block color/gray
/// means (4), first- and second-order gradients of the block-mean image (12).
/// channels <= 32 keeps the leading planes.
FeatureGrid extract_features(const Image& image,
                             int channels = kFeatureChannels);

/// Backward-warp previous-frame features onto the current frame at every
/// depth hypothesis; cells that leave the grid or the frustum are zeroed
/// with validity=false.
WarpedVolume build_warped_volume(const FeatureGrid& feat_prev,
                                 const HypothesisVolume& hypotheses,
                                 const Intrinsics& K_scaled, const Pose& pose);

/// s_i^g = (1/G) <v_i^g, f_i^g> per group and hypothesis.
CostVolume group_correlation(const WarpedVolume& volume,
                             const FeatureGrid& feat_cur, int groups);

/// Softmax over hypotheses of the group-mean similarity, sharpened by
/// 1/temperature and stabilized by max subtraction. Pixels whose logits are
/// all equal (e.g. fully invalid) come out uniform and flagged.
ProbabilityVolume cost_to_probability(const CostVolume& cost,
                                      double temperature);

}  // namespace mfdepth
