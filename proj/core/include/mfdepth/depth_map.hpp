#pragma once

#include "mfdepth/grid.hpp"

namespace mfdepth {

enum class MapResolution { kQuarter, kFull };
enum class DepthKind { kMono, kMvs, kFused };

/// Strictly positive per-pixel depth in meters.
struct DepthMap {
  GridF data;
  MapResolution resolution = MapResolution::kFull;
  DepthKind kind = DepthKind::kMono;
};

/// Per-pixel uncertainty in [0,1]; 1 means "distrust the matched depth".
struct UncertaintyMap {
  GridF data;
};

}  // namespace mfdepth
