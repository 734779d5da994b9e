#pragma once

#include "mfdepth/grid.hpp"
#include "mfdepth/photometric.hpp"  // NoValidPixels

namespace mfdepth {

struct MetricReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  long n_valid = 0;
  double scale_applied = 1.0;
};

struct EvalOptions {
  bool median_scale = true;
  double cap = 80.0;  // meters; 200 for the long-range evaluation mode
};

/// Standard depth error suite. Pixels with gt <= 0 (or outside `mask`, when
/// given) are ignored; median scaling multiplies the prediction by
/// median(gt)/median(pred); both maps are then clamped into [1e-3, cap].
MetricReport evaluate(const GridF& pred, const GridF& gt, const GridB* mask,
                      const EvalOptions& options);

}  // namespace mfdepth
