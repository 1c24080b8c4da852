#pragma once

#include <cstdint>
#include <vector>

#include "panfuse/raster.hpp"

namespace panfuse {

/// Partition of a mask's known pixels into maximal connected components of
/// equal label. region_of holds -1 for unknown pixels and for components
/// that fell under the size threshold.
struct RegionMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> region_of;
  std::int32_t count = 0;

  std::int32_t at(int u, int v) const { return region_of[static_cast<std::size_t>(v) * width + u]; }
};

/// Connected components of equal label under 4- or 8-connectivity. Region
/// ids follow raster-scan order of each component's first pixel; components
/// smaller than min_region_px are dissolved (marked -1).
RegionMap region_grow(const LabelRaster& mask, int connectivity, int min_region_px);

/// Relabels each connected region of the machine mask with the majority
/// label the reference mask shows over that region. Unknown reference
/// pixels carry no vote; a region the reference never covers keeps its
/// label, as do pixels outside any region. Vote ties keep the region's own
/// label when it is among the tied classes, otherwise the smallest class id.
LabelRaster fuse_pseudo_label(const LabelRaster& m2f, const LabelRaster& reference,
                              int connectivity, int min_region_px);

}  // namespace panfuse
