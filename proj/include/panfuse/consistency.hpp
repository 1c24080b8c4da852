#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "panfuse/geometry.hpp"
#include "panfuse/raster.hpp"

namespace panfuse {

/// One view's worth of inputs: camera, depth, and a semantic label raster.
struct ViewFrame {
  const CameraView* view = nullptr;
  const DepthMap* depth = nullptr;
  const LabelRaster* sem = nullptr;
};

struct WindowConfig {
  int window_size = 4;        // number of neighboring views compared against
  double occlusion_tol = 0.05;  // meters
};

/// Per-pixel {0,1} agreement mask. 1 means every neighbor label warped onto
/// the pixel matches its own label (vacuously 1 when nothing warps there);
/// 0 means some neighbor disagrees, or the pixel itself has no valid depth
/// or no known label.
struct ConsistencyMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> q;

  std::uint8_t at(int u, int v) const { return q[static_cast<std::size_t>(v) * width + u]; }
};

/// Picks the window_size views nearest to the reference in sequence order:
/// floor(window_size/2) before it, the rest after, shifted when the sequence
/// boundary truncates one side. The reference itself is excluded. Returns
/// view ids in ascending sequence order.
std::vector<int> neighbor_views(int ref_view_id, const std::vector<int>& ordered_view_ids,
                                const WindowConfig& cfg);

/// Warps every neighbor pixel into the reference view and ANDs the label
/// agreements per landing pixel. Neighbor pixels without valid depth, failing
/// the occlusion check, or carrying the unknown label contribute nothing.
ConsistencyMask consistency_mask(const ViewFrame& ref, std::span<const ViewFrame> neighbors,
                                 const WindowConfig& cfg, int threads = 1);

/// Keeps labels where q == 1 and blanks them to unknown where q == 0.
LabelRaster apply_consistency(const LabelRaster& mask, const ConsistencyMask& q);

}  // namespace panfuse
