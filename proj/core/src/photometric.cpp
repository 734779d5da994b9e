#include "mfdepth/photometric.hpp"

#include <algorithm>
#include <cmath>

namespace mfdepth {

namespace {
constexpr double kSsimWeight = 0.85;
constexpr double kL1Weight = 0.15;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

// 3x3 box mean with clamped borders.
double box3(const Image& img, int c, int y, int x) {
  const int h = img.height(), w = img.width();
  double acc = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    const int yy = std::clamp(y + dy, 0, h - 1);
    for (int dx = -1; dx <= 1; ++dx)
      acc += img.at(yy, std::clamp(x + dx, 0, w - 1), c);
  }
  return acc / 9.0;
}

double box3_product(const Image& a, const Image& b, int c, int y, int x) {
  const int h = a.height(), w = a.width();
  double acc = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    const int yy = std::clamp(y + dy, 0, h - 1);
    for (int dx = -1; dx <= 1; ++dx) {
      const int xx = std::clamp(x + dx, 0, w - 1);
      acc += static_cast<double>(a.at(yy, xx, c)) * b.at(yy, xx, c);
    }
  }
  return acc / 9.0;
}
}  // namespace

SynthesizedImage synthesize(const Image& src, const DepthMap& depth,
                            const Intrinsics& K, const Pose& pose) {
  if (depth.resolution != MapResolution::kFull ||
      depth.data.height() != K.height || depth.data.width() != K.width ||
      src.height() != K.height || src.width() != K.width)
    throw std::invalid_argument("synthesize: full-resolution inputs required");

  SynthesizedImage out;
  out.image = Image(K.height, K.width);
  out.validity = GridB(K.height, K.width, 0);

  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const double d = depth.data(y, x);
      if (!(d > 0.0)) continue;
      const WarpResult warped = warp_pixel(
          PixelCoord{static_cast<double>(x), static_cast<double>(y), d}, K,
          pose);
      if (!warped.positive_depth ||
          !sampleable(K.height, K.width, warped.pixel.u, warped.pixel.v))
        continue;

      const double u = warped.pixel.u, v = warped.pixel.v;
      const int x0 = static_cast<int>(std::floor(u));
      const int y0 = static_cast<int>(std::floor(v));
      const int x1 = std::min(x0 + 1, K.width - 1);
      const int y1 = std::min(y0 + 1, K.height - 1);
      const double fx = u - x0, fy = v - y0;
      for (int c = 0; c < 3; ++c) {
        const double top =
            src.at(y0, x0, c) + fx * (src.at(y0, x1, c) - src.at(y0, x0, c));
        const double bot =
            src.at(y1, x0, c) + fx * (src.at(y1, x1, c) - src.at(y1, x0, c));
        out.image.at(y, x, c) = static_cast<float>(top + fy * (bot - top));
      }
      out.validity(y, x) = 1;
    }
  }
  return out;
}

GridF photometric_error(const Image& a, const Image& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("photometric_error: shape mismatch");
  const int h = a.height(), w = a.width();
  GridF pe(h, w);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double ssim_acc = 0.0, l1_acc = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double mu_a = box3(a, c, y, x);
        const double mu_b = box3(b, c, y, x);
        const double var_a = box3_product(a, a, c, y, x) - mu_a * mu_a;
        const double var_b = box3_product(b, b, c, y, x) - mu_b * mu_b;
        const double cov = box3_product(a, b, c, y, x) - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
        const double den =
            (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
        ssim_acc += num / den;
        l1_acc += std::abs(static_cast<double>(a.at(y, x, c)) - b.at(y, x, c));
      }
      const double ssim = ssim_acc / 3.0;
      const double l1 = l1_acc / 3.0;
      pe(y, x) =
          static_cast<float>(kSsimWeight * (1.0 - ssim) * 0.5 + kL1Weight * l1);
    }
  }
  return pe;
}

double min_reprojection_loss(const Image& target,
                             const std::vector<SynthesizedImage>& views) {
  if (views.empty())
    throw std::invalid_argument("min_reprojection_loss: no views");

  std::vector<GridF> errors;
  errors.reserve(views.size());
  for (const auto& view : views) errors.push_back(photometric_error(target, view.image));

  const int h = target.height(), w = target.width();
  double acc = 0.0;
  long count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool all_valid = true;
      for (const auto& view : views)
        all_valid = all_valid && view.validity(y, x) != 0;
      if (!all_valid) continue;
      double best = errors[0](y, x);
      for (std::size_t k = 1; k < errors.size(); ++k)
        best = std::min(best, static_cast<double>(errors[k](y, x)));
      acc += best;
      ++count;
    }
  }
  if (count == 0)
    throw NoValidPixels("min_reprojection_loss: no jointly valid pixels");
  return acc / count;
}

double smoothness_loss(const DepthMap& depth, const Image& image) {
  const int h = depth.data.height(), w = depth.data.width();
  if (image.height() != h || image.width() != w)
    throw std::invalid_argument("smoothness_loss: shape mismatch");

  double inv_mean = 0.0;
  for (const float d : depth.data.data()) inv_mean += 1.0 / d;
  inv_mean /= depth.data.size();
  if (!(inv_mean > 0.0))
    throw std::invalid_argument("smoothness_loss: invalid depth map");

  auto dstar = [&](int y, int x) {
    return (1.0 / depth.data(y, x)) / inv_mean;
  };
  auto img_grad = [&](int y0, int x0, int y1, int x1) {
    double g = 0.0;
    for (int c = 0; c < 3; ++c)
      g += std::abs(static_cast<double>(image.at(y1, x1, c)) -
                    image.at(y0, x0, c));
    return g / 3.0;
  };

  double acc_x = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x)
      acc_x += std::abs(dstar(y, x + 1) - dstar(y, x)) *
               std::exp(-img_grad(y, x, y, x + 1));
  double acc_y = 0.0;
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x < w; ++x)
      acc_y += std::abs(dstar(y + 1, x) - dstar(y, x)) *
               std::exp(-img_grad(y, x, y + 1, x));

  const double nx = static_cast<double>(h) * (w - 1);
  const double ny = static_cast<double>(h - 1) * w;
  return acc_x / nx + acc_y / ny;
}

namespace {
double depth_loss(const Image& target, const std::vector<SourceView>& sources,
                  const DepthMap& depth, const Intrinsics& K, double gamma,
                  double* reproj, double* smooth) {
  std::vector<SynthesizedImage> views;
  views.reserve(sources.size());
  for (const auto& s : sources)
    views.push_back(synthesize(*s.image, depth, K, s.pose));
  *reproj = min_reprojection_loss(target, views);
  *smooth = smoothness_loss(depth, target);
  return *reproj + gamma * *smooth;
}
}  // namespace

LossBreakdown composite_loss(const Image& target,
                             const std::vector<SourceView>& sources,
                             const DepthMap& mono, const DepthMap& mvs,
                             const DepthMap& fused, const Intrinsics& K,
                             const LossWeights& weights) {
  if (sources.empty())
    throw std::invalid_argument("composite_loss: no source views");

  LossBreakdown out;
  double r = 0.0, s = 0.0;
  out.mono = depth_loss(target, sources, mono, K, weights.gamma, &r, &s);
  out.reprojection += weights.lambda_mono * r;
  out.smoothness += weights.lambda_mono * s;
  out.mvs = depth_loss(target, sources, mvs, K, weights.gamma, &r, &s);
  out.reprojection += weights.lambda_mvs * r;
  out.smoothness += weights.lambda_mvs * s;
  out.fused = depth_loss(target, sources, fused, K, weights.gamma, &r, &s);
  out.reprojection += weights.lambda_fused * r;
  out.smoothness += weights.lambda_fused * s;

  out.total = weights.lambda_mono * out.mono + weights.lambda_mvs * out.mvs +
              weights.lambda_fused * out.fused;
  return out;
}

}  // namespace mfdepth
