#pragma once

#include <cstdint>
#include <set>

#include "panfuse/geometry.hpp"
#include "panfuse/raster.hpp"

namespace panfuse {

struct ProjectionConfig {
  int splat_radius = 1;     // Chebyshev radius in pixels around the landing pixel
  double depth_gate = 0.1;  // meters; writes farther than this from the view's
                            // own depth are rejected
};

enum class LabelChannel { semantic, instance };

/// Projects every labeled point into the view and splats its label onto the
/// pixels around its landing position. Conflicts resolve to the smallest
/// projected z (then the smallest label, so the result is independent of
/// point order); pixels nobody writes stay unknown.
LabelRaster project_cloud_to_mask(const LabeledPointCloud& cloud, const CameraView& view,
                                  const DepthMap& depth, const ProjectionConfig& cfg,
                                  LabelChannel channel, int threads = 1);

class GlobalInstanceSet;

/// Projects every global instance's point set under its canonical id, then
/// blanks all pixels whose consistent semantic label is not a things class.
LabelRaster project_instances_to_masks(const GlobalInstanceSet& global,
                                       const LabelRaster& consistent_sem,
                                       const std::set<std::uint16_t>& things,
                                       const CameraView& view, const DepthMap& depth,
                                       const ProjectionConfig& cfg, int threads = 1);

}  // namespace panfuse
