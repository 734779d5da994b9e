#include "mfdepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mfdepth {

namespace {
double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (n % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return (lo + hi) / 2.0;
}
}  // namespace

MetricReport evaluate(const GridF& pred, const GridF& gt, const GridB* mask,
                      const EvalOptions& options) {
  if (!pred.same_shape(gt))
    throw std::invalid_argument("evaluate: shape mismatch");
  if (mask && !mask->same_shape(gt))
    throw std::invalid_argument("evaluate: mask shape mismatch");

  std::vector<double> p, g;
  p.reserve(gt.size());
  g.reserve(gt.size());
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (gt(y, x) <= 0.0f) continue;
      if (mask && (*mask)(y, x) == 0) continue;
      p.push_back(pred(y, x));
      g.push_back(gt(y, x));
    }
  }
  if (p.empty()) throw NoValidPixels("evaluate: empty mask");

  MetricReport report;
  report.n_valid = static_cast<long>(p.size());

  if (options.median_scale) {
    report.scale_applied = median(g) / median(p);
    for (double& v : p) v *= report.scale_applied;
  }

  double abs_rel = 0.0, sq_rel = 0.0, sq = 0.0, sq_log = 0.0;
  long d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = std::clamp(p[i], 1e-3, options.cap);
    const double gi = std::clamp(g[i], 1e-3, options.cap);
    const double diff = pi - gi;
    abs_rel += std::abs(diff) / gi;
    sq_rel += diff * diff / gi;
    sq += diff * diff;
    const double dlog = std::log(pi) - std::log(gi);
    sq_log += dlog * dlog;
    const double thresh = std::max(gi / pi, pi / gi);
    d1 += thresh < 1.25;
    d2 += thresh < 1.25 * 1.25;
    d3 += thresh < 1.25 * 1.25 * 1.25;
  }
  const double n = static_cast<double>(p.size());
  report.abs_rel = abs_rel / n;
  report.sq_rel = sq_rel / n;
  report.rmse = std::sqrt(sq / n);
  report.rmse_log = std::sqrt(sq_log / n);
  report.delta1 = d1 / n;
  report.delta2 = d2 / n;
  report.delta3 = d3 / n;
  return report;
}

}  // namespace mfdepth
