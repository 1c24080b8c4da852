#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>

#include "panfuse/raster.hpp"

namespace panfuse {

struct SceneEvalReport {
  double miou = 0.0;
  std::map<std::uint16_t, double> per_class_iou;  // classes present in the ground truth
  double pq_scene = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

/// Class IoUs over all views concatenated as one image. Pixels with unknown
/// ground truth are excluded everywhere; the mean runs over classes present
/// in the ground truth.
std::pair<double, std::map<std::uint16_t, double>> scene_miou(
    std::span<const LabelRaster> pred, std::span<const LabelRaster> gt);

/// Panoptic quality over the concatenation of all views. Segments are
/// (class, instance) for things pixels and (class) for stuff, with instance
/// ids global across views; a predicted segment matches a ground-truth
/// segment of the same class when their IoU exceeds 0.5 (which makes the
/// matching unique). Fills the pq/sq/rq/tp/fp/fn fields only.
SceneEvalReport pq_scene(std::span<const LabelRaster> pred_sem,
                         std::span<const LabelRaster> pred_inst,
                         std::span<const LabelRaster> gt_sem,
                         std::span<const LabelRaster> gt_inst,
                         const std::set<std::uint16_t>& things);

/// scene_miou + pq_scene in one report.
SceneEvalReport evaluate_scene(std::span<const LabelRaster> pred_sem,
                               std::span<const LabelRaster> pred_inst,
                               std::span<const LabelRaster> gt_sem,
                               std::span<const LabelRaster> gt_inst,
                               const std::set<std::uint16_t>& things);

}  // namespace panfuse
