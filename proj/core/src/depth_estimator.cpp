#include "mfdepth/depth_estimator.hpp"

#include <algorithm>
#include <cmath>

namespace mfdepth {

DepthMap localmax_depth(const ProbabilityVolume& prob,
                        const HypothesisVolume& hypotheses, int radius) {
  if (prob.height != hypotheses.height || prob.width != hypotheses.width ||
      prob.count != hypotheses.count)
    throw std::invalid_argument("localmax_depth: shape mismatch");
  if (radius < 0 || 2 * radius + 1 > prob.count)
    throw std::invalid_argument("localmax_depth: window exceeds hypotheses");

  const int h = prob.height, w = prob.width, D = prob.count;
  DepthMap out;
  out.data = GridF(h, w);
  out.resolution = MapResolution::kQuarter;
  out.kind = DepthKind::kMvs;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * w + x;
      const float* p = prob.data.data() + pix * D;

      int best = 0;
      for (int j = 1; j < D; ++j)
        if (p[j] > p[best]) best = j;  // ties keep the lowest index

      const int lo = std::max(0, best - radius);
      const int hi = std::min(D - 1, best + radius);
      double weight = 0.0, inv = 0.0;
      for (int j = lo; j <= hi; ++j) {
        weight += p[j];
        inv += p[j] / hypotheses.at(y, x, j);
      }
      const double depth =
          weight < 1e-12 ? hypotheses.at(y, x, best) : weight / inv;
      out.data(y, x) = static_cast<float>(depth);
    }
  }
  return out;
}

GridF probability_entropy(const ProbabilityVolume& prob) {
  const int h = prob.height, w = prob.width, D = prob.count;
  const double cap = std::log(static_cast<double>(D));
  GridF out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * w + x;
      const float* p = prob.data.data() + pix * D;
      double sum = 0.0;
      for (int j = 0; j < D; ++j) sum += p[j];
      double entropy = 0.0;
      for (int j = 0; j < D; ++j) {
        const double q = p[j] / sum;  // renormalize float round-off away
        if (q > 0.0) entropy -= q * std::log(q);
      }
      out(y, x) = static_cast<float>(std::clamp(entropy, 0.0, cap));
    }
  }
  return out;
}

UncertaintyMap uncertainty_from_entropy(const GridF& entropy, int count,
                                        const UncertaintyOptions& options) {
  const double cap = std::log(static_cast<double>(count));
  UncertaintyMap out;
  out.data = GridF(entropy.height(), entropy.width());
  for (int y = 0; y < entropy.height(); ++y) {
    for (int x = 0; x < entropy.width(); ++x) {
      const double e = entropy(y, x);
      double u;
      if (options.mapping == UncertaintyMapping::kNormalized) {
        u = e / cap;
      } else {
        u = 1.0 / (1.0 + std::exp(-options.sigmoid_a * (e - options.sigmoid_b)));
      }
      out.data(y, x) = static_cast<float>(std::clamp(u, 0.0, 1.0));
    }
  }
  return out;
}

DepthMap fuse_depth(const DepthMap& mono, const DepthMap& mvs,
                    const UncertaintyMap& u) {
  if (mono.resolution != mvs.resolution)
    throw ResolutionMismatch("fuse_depth: resolution tags differ");
  if (!mono.data.same_shape(mvs.data) || !mono.data.same_shape(u.data))
    throw ResolutionMismatch("fuse_depth: map shapes differ");

  DepthMap out;
  out.data = GridF(mono.data.height(), mono.data.width());
  out.resolution = mono.resolution;
  out.kind = DepthKind::kFused;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double w = u.data.data()[i];
    out.data.data()[i] = static_cast<float>(
        w * mono.data.data()[i] + (1.0 - w) * mvs.data.data()[i]);
  }
  return out;
}

DepthMap upsample_depth(const DepthMap& quarter, int factor) {
  if (factor < 1) throw std::invalid_argument("upsample_depth: bad factor");
  const int hq = quarter.data.height(), wq = quarter.data.width();
  const int h = hq * factor, w = wq * factor;

  DepthMap out;
  out.data = GridF(h, w);
  out.resolution = MapResolution::kFull;
  out.kind = quarter.kind;

  const double off = (factor - 1) * 0.5;
  for (int y = 0; y < h; ++y) {
    const double sy = std::clamp((y - off) / factor, 0.0, hq - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, hq - 1);
    const double fy = sy - y0;
    for (int x = 0; x < w; ++x) {
      const double sx = std::clamp((x - off) / factor, 0.0, wq - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, wq - 1);
      const double fx = sx - x0;

      const float d00 = quarter.data(y0, x0), d01 = quarter.data(y0, x1);
      const float d10 = quarter.data(y1, x0), d11 = quarter.data(y1, x1);
      if (d00 == d01 && d00 == d10 && d00 == d11) {
        out.data(y, x) = d00;  // constant patches pass through untouched
        continue;
      }
      const double i00 = 1.0 / d00, i01 = 1.0 / d01;
      const double i10 = 1.0 / d10, i11 = 1.0 / d11;
      const double top = i00 + fx * (i01 - i00);
      const double bot = i10 + fx * (i11 - i10);
      out.data(y, x) = static_cast<float>(1.0 / (top + fy * (bot - top)));
    }
  }
  return out;
}

}  // namespace mfdepth
