#include "mfdepth/cost_volume.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfdepth {

namespace {

// Raw feature planes before frame normalization, laid out plane-major.
struct PlaneStack {
  int height, width;
  std::vector<double> planes;  // (c * H * W + y * W + x)

  double& at(int c, int y, int x) {
    return planes[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return planes[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

}  // namespace

FeatureGrid extract_features(const Image& image, int channels) {
  const int h = image.height(), w = image.width();
  if (h % 4 != 0 || w % 4 != 0)
    throw std::invalid_argument("extract_features: size not divisible by 4");
  if (channels < 1 || channels > kFeatureChannels)
    throw std::invalid_argument("extract_features: channels out of range");

  const int hq = h / 4, wq = w / 4;
  PlaneStack stack{hq, wq,
                   std::vector<double>(static_cast<std::size_t>(
                       kFeatureChannels) * hq * wq, 0.0)};

  // Block statistics at quarter resolution.
  GridF mean_r(hq, wq), mean_g(hq, wq), mean_b(hq, wq), mean_gray(hq, wq);
  for (int by = 0; by < hq; ++by) {
    for (int bx = 0; bx < wq; ++bx) {
      double acc[3] = {0, 0, 0};
      double gray[16];
      double gray_sum = 0.0;
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          const int y = by * 4 + r, x = bx * 4 + c;
          double g = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            const double v = image.at(y, x, ch);
            acc[ch] += v;
            g += v;
          }
          g /= 3.0;
          gray[r * 4 + c] = g;
          gray_sum += g;
        }
      }
      const double mu = gray_sum / 16.0;
      double var = 0.0;
      for (double g : gray) var += (g - mu) * (g - mu);
      var /= 16.0;
      const double sd = std::sqrt(var);

      // Planes 0..15: variance-normalized block intensities.
      for (int k = 0; k < 16; ++k)
        stack.at(k, by, bx) = (gray[k] - mu) / (sd + 1e-6);
      // Planes 16..19: block means (R, G, B, gray).
      stack.at(16, by, bx) = acc[0] / 16.0;
      stack.at(17, by, bx) = acc[1] / 16.0;
      stack.at(18, by, bx) = acc[2] / 16.0;
      stack.at(19, by, bx) = mu;
      // Plane 28: block texture strength.
      stack.at(28, by, bx) = sd;

      mean_r(by, bx) = static_cast<float>(acc[0] / 16.0);
      mean_g(by, bx) = static_cast<float>(acc[1] / 16.0);
      mean_b(by, bx) = static_cast<float>(acc[2] / 16.0);
      mean_gray(by, bx) = static_cast<float>(mu);
    }
  }

  // Gradient planes on the block-mean maps, clamped at the borders.
  auto cx = [&](const GridF& g, int y, int x) {
    const int x0 = std::max(0, x - 1), x1 = std::min(wq - 1, x + 1);
    return (g(y, x1) - g(y, x0)) * 0.5;
  };
  auto cy = [&](const GridF& g, int y, int x) {
    const int y0 = std::max(0, y - 1), y1 = std::min(hq - 1, y + 1);
    return (g(y1, x) - g(y0, x)) * 0.5;
  };
  for (int y = 0; y < hq; ++y) {
    for (int x = 0; x < wq; ++x) {
      stack.at(20, y, x) = cx(mean_gray, y, x);
      stack.at(21, y, x) = cy(mean_gray, y, x);
      stack.at(22, y, x) = cx(mean_r, y, x);
      stack.at(23, y, x) = cy(mean_r, y, x);
      stack.at(24, y, x) = cx(mean_g, y, x);
      stack.at(25, y, x) = cy(mean_g, y, x);
      stack.at(26, y, x) = cx(mean_b, y, x);
      stack.at(27, y, x) = cy(mean_b, y, x);
      const int xm = std::max(0, x - 1), xp = std::min(wq - 1, x + 1);
      const int ym = std::max(0, y - 1), yp = std::min(hq - 1, y + 1);
      stack.at(29, y, x) =
          mean_gray(y, xp) - 2.0 * mean_gray(y, x) + mean_gray(y, xm);
      stack.at(30, y, x) =
          mean_gray(yp, x) - 2.0 * mean_gray(y, x) + mean_gray(ym, x);
      stack.at(31, y, x) = (mean_gray(yp, xp) - mean_gray(ym, xm)) * 0.5;
    }
  }

  // Per-channel frame normalization; a flat channel falls back to zeros.
  FeatureGrid out;
  out.height = hq;
  out.width = wq;
  out.channels = channels;
  out.data.assign(static_cast<std::size_t>(hq) * wq * channels, 0.0f);
  const double n = static_cast<double>(hq) * wq;
  int degenerate = 0;
  for (int c = 0; c < channels; ++c) {
    double sum = 0.0, sum2 = 0.0;
    for (int y = 0; y < hq; ++y)
      for (int x = 0; x < wq; ++x) sum += stack.at(c, y, x);
    const double mu = sum / n;
    for (int y = 0; y < hq; ++y)
      for (int x = 0; x < wq; ++x) {
        const double d = stack.at(c, y, x) - mu;
        sum2 += d * d;
      }
    const double sd = std::sqrt(sum2 / n);
    if (sd < 1e-6) {
      ++degenerate;  // leave the channel at zero
      continue;
    }
    for (int y = 0; y < hq; ++y)
      for (int x = 0; x < wq; ++x)
        out.data[(static_cast<std::size_t>(y) * wq + x) * channels + c] =
            static_cast<float>((stack.at(c, y, x) - mu) / (sd + 1e-6));
  }
  out.textureless = degenerate == channels;
  return out;
}

WarpedVolume build_warped_volume(const FeatureGrid& feat_prev,
                                 const HypothesisVolume& hypotheses,
                                 const Intrinsics& K_scaled,
                                 const Pose& pose) {
  if (hypotheses.height != feat_prev.height ||
      hypotheses.width != feat_prev.width)
    throw std::invalid_argument("build_warped_volume: shape mismatch");
  if (K_scaled.width != feat_prev.width ||
      K_scaled.height != feat_prev.height)
    throw std::invalid_argument(
        "build_warped_volume: intrinsics not at feature resolution");

  const int h = feat_prev.height, w = feat_prev.width;
  const int C = feat_prev.channels, D = hypotheses.count;

  WarpedVolume vol;
  vol.height = h;
  vol.width = w;
  vol.channels = C;
  vol.count = D;
  vol.data.assign(static_cast<std::size_t>(h) * w * D * C, 0.0f);
  vol.validity.assign(static_cast<std::size_t>(h) * w * D, 0);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int j = 0; j < D; ++j) {
        const double d = hypotheses.at(y, x, j);
        const WarpResult warped =
            warp_pixel(PixelCoord{static_cast<double>(x),
                                  static_cast<double>(y), d},
                       K_scaled, pose);
        // Bilinear support needs the full 4-neighborhood, so validity is
        // [0, W-1] x [0, H-1] rather than [0, W) x [0, H).
        if (!warped.positive_depth ||
            !sampleable(h, w, warped.pixel.u, warped.pixel.v))
          continue;

        const double u = warped.pixel.u, v = warped.pixel.v;
        const int x0 = static_cast<int>(std::floor(u));
        const int y0 = static_cast<int>(std::floor(v));
        const int x1 = std::min(x0 + 1, w - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const float fx = static_cast<float>(u - x0);
        const float fy = static_cast<float>(v - y0);
        const float w00 = (1 - fx) * (1 - fy), w01 = fx * (1 - fy);
        const float w10 = (1 - fx) * fy, w11 = fx * fy;

        const std::size_t cell =
            (static_cast<std::size_t>(y) * w + x) * D + j;
        float* dst = vol.data.data() + cell * C;
        const std::size_t s00 = (static_cast<std::size_t>(y0) * w + x0) * C;
        const std::size_t s01 = (static_cast<std::size_t>(y0) * w + x1) * C;
        const std::size_t s10 = (static_cast<std::size_t>(y1) * w + x0) * C;
        const std::size_t s11 = (static_cast<std::size_t>(y1) * w + x1) * C;
        const float* src = feat_prev.data.data();
        for (int c = 0; c < C; ++c) {
          dst[c] = w00 * src[s00 + c] + w01 * src[s01 + c] +
                   w10 * src[s10 + c] + w11 * src[s11 + c];
        }
        vol.validity[cell] = 1;
      }
    }
  }
  return vol;
}

CostVolume group_correlation(const WarpedVolume& volume,
                             const FeatureGrid& feat_cur, int groups) {
  if (volume.height != feat_cur.height || volume.width != feat_cur.width ||
      volume.channels != feat_cur.channels)
    throw std::invalid_argument("group_correlation: shape mismatch");
  const int C = volume.channels;
  if (groups < 1 || C % groups != 0)
    throw std::invalid_argument(
        "group_correlation: channels not divisible by groups");

  const int h = volume.height, w = volume.width, D = volume.count;
  const int per_group = C / groups;
  const double inv_g = 1.0 / groups;

  CostVolume cost;
  cost.height = h;
  cost.width = w;
  cost.groups = groups;
  cost.count = D;
  cost.data.assign(static_cast<std::size_t>(h) * w * groups * D, 0.0f);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * w + x;
      const float* f = feat_cur.data.data() + pix * C;
      for (int j = 0; j < D; ++j) {
        const std::size_t cell = pix * D + j;
        if (!volume.validity[cell]) continue;  // zero evidence
        const float* v = volume.data.data() + cell * C;
        for (int g = 0; g < groups; ++g) {
          double dot = 0.0;
          const int base = g * per_group;
          for (int c = 0; c < per_group; ++c)
            dot += static_cast<double>(v[base + c]) * f[base + c];
          cost.data[(pix * groups + g) * D + j] =
              static_cast<float>(dot * inv_g);
        }
      }
    }
  }
  return cost;
}

ProbabilityVolume cost_to_probability(const CostVolume& cost,
                                      double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("cost_to_probability: temperature must be > 0");

  const int h = cost.height, w = cost.width, G = cost.groups, D = cost.count;
  ProbabilityVolume prob;
  prob.height = h;
  prob.width = w;
  prob.count = D;
  prob.data.assign(static_cast<std::size_t>(h) * w * D, 0.0f);
  prob.low_evidence.assign(static_cast<std::size_t>(h) * w, 0);

  std::vector<double> logits(D);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * w + x;
      for (int j = 0; j < D; ++j) {
        double acc = 0.0;
        for (int g = 0; g < G; ++g) acc += cost.data[(pix * G + g) * D + j];
        logits[j] = acc / G;
      }
      const auto [lo, hi] = std::minmax_element(logits.begin(), logits.end());
      const double max_logit = *hi;
      if (max_logit - *lo < 1e-12) {
        // No discriminating evidence at this pixel (e.g. all warps invalid).
        const float uniform = 1.0f / D;
        for (int j = 0; j < D; ++j) prob.data[pix * D + j] = uniform;
        prob.low_evidence[pix] = 1;
        continue;
      }
      double sum = 0.0;
      for (int j = 0; j < D; ++j) {
        logits[j] = std::exp((logits[j] - max_logit) / temperature);
        sum += logits[j];
      }
      for (int j = 0; j < D; ++j)
        prob.data[pix * D + j] = static_cast<float>(logits[j] / sum);
    }
  }
  return prob;
}

}  // namespace mfdepth
