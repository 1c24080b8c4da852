#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "panfuse/geometry.hpp"
#include "panfuse/obb.hpp"
#include "panfuse/raster.hpp"

namespace panfuse {

enum class CostMode {
  iou_plus_iom,  // -IoU - IoM
  iou_only,      // -IoU
  iom_only,      // -IoM
};

struct MatchConfig {
  double tau_new = -0.1;     // matched costs above this spawn a new instance
  double trim_pct = 0.02;    // outlier percentile trimmed before box fitting
  std::size_t point_cap = 20000;
  int min_segment_px = 64;   // 2D segments below this are ignored as speckle
  IouMode iou_mode = IouMode::paper;
  CostMode cost_mode = CostMode::iou_plus_iom;
  std::uint64_t seed = 1;    // drives the reservoir down-sampling
};

/// Ordered set of (point set, box) pairs; the entry index is the canonical
/// scene-global instance id.
class GlobalInstanceSet {
 public:
  struct Entry {
    std::vector<Vec3> points;
    ObbZ box;
  };

  explicit GlobalInstanceSet(std::size_t max_instances = 25) : max_instances_(max_instances) {}

  std::size_t size() const { return entries_.size(); }
  std::size_t max_instances() const { return max_instances_; }
  const Entry& entry(std::size_t id) const { return entries_[id]; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }

  /// All instance points as one cloud with inst = entry index.
  LabeledPointCloud as_cloud() const;

 private:
  std::vector<Entry> entries_;
  std::size_t max_instances_;
};

struct UpdateStats {
  int segments = 0;  // usable local segments in this view
  int merged = 0;
  int added = 0;
  int dropped = 0;   // new segments discarded because the id space was full
};

/// One view's worth of the matching pass: lifts every things-class instance
/// segment to 3D, fits boxes, solves the local-to-global assignment on the
/// configured cost, and merges or appends per the tau_new threshold. Segments
/// that cannot fit under max_instances are dropped lowest-volume-first with a
/// warning on stderr.
UpdateStats update_global_set(GlobalInstanceSet& global, const CameraView& view,
                              const DepthMap& depth, const LabelRaster& inst_mask,
                              const LabelRaster& sem_mask, const std::set<std::uint16_t>& things,
                              const MatchConfig& cfg);

/// Per-view 2D matcher: assigns the machine mask's instance segments to the
/// rendered mask's segments by maximum pixel IoU, relabels accordingly, and
/// gives unmatched machine segments fresh unused ids (unknown once the id
/// space [0, max_instances) is exhausted).
LabelRaster match_masks_2d(const LabelRaster& rendered, const LabelRaster& m2f,
                           std::size_t max_instances = 25);

}  // namespace panfuse
