#include "panfuse/view_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "panfuse/instance_match.hpp"
#include "panfuse/parallel.hpp"

namespace panfuse {

namespace {

struct Candidate {
  double z = std::numeric_limits<double>::infinity();
  std::uint16_t label = kUnknownLabel;

  // Total order: nearer wins, equal depths resolve to the smaller label so
  // the outcome cannot depend on point order or chunking.
  bool beats(const Candidate& other) const {
    return z < other.z || (z == other.z && label < other.label);
  }
};

using Buffer = std::vector<Candidate>;

void splat_points(const LabeledPointCloud& cloud, std::span<const std::uint16_t> labels,
                  const CameraView& view, const DepthMap& depth, const ProjectionConfig& cfg,
                  Buffer& buffer, int threads) {
  const int w = view.width, h = view.height;
  const std::size_t chunk = 65536;  // fixed granularity keeps merges thread-count-free
  const std::size_t num_chunks = (cloud.size() + chunk - 1) / chunk;
  std::vector<Buffer> partial(num_chunks);

  parallel_chunks(cloud.size(), chunk, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    Buffer& buf = partial[c];
    buf.assign(static_cast<std::size_t>(w) * h, Candidate{});
    for (std::size_t i = b; i < e; ++i) {
      const std::uint16_t label = labels[i];
      if (label == kUnknownLabel) continue;
      const auto proj = world_to_pixel(view, cloud.points[i]);
      if (!proj) continue;
      const int pu = static_cast<int>(round_half_up(proj->px.u));
      const int pv = static_cast<int>(round_half_up(proj->px.v));
      for (int dv = -cfg.splat_radius; dv <= cfg.splat_radius; ++dv) {
        for (int du = -cfg.splat_radius; du <= cfg.splat_radius; ++du) {
          const int u = pu + du, v = pv + dv;
          if (!view.contains(u, v)) continue;
          if (!depth.valid_at(u, v)) continue;
          if (std::abs(proj->z_ref - static_cast<double>(depth.at(u, v))) > cfg.depth_gate)
            continue;
          Candidate cand{proj->z_ref, label};
          Candidate& slot = buf[static_cast<std::size_t>(v) * w + u];
          if (cand.beats(slot)) slot = cand;
        }
      }
    }
  });

  for (const Buffer& buf : partial)
    for (std::size_t i = 0; i < buffer.size(); ++i)
      if (buf[i].beats(buffer[i])) buffer[i] = buf[i];
}

LabelRaster buffer_to_raster(const Buffer& buffer, int w, int h, RasterKind kind) {
  LabelRaster out = LabelRaster::filled(w, h, kind);
  for (std::size_t i = 0; i < buffer.size(); ++i) out.labels[i] = buffer[i].label;
  return out;
}

}  // namespace

LabelRaster project_cloud_to_mask(const LabeledPointCloud& cloud, const CameraView& view,
                                  const DepthMap& depth, const ProjectionConfig& cfg,
                                  LabelChannel channel, int threads) {
  const auto& labels =
      channel == LabelChannel::semantic ? cloud.sem_labels : cloud.inst_labels;
  Buffer buffer(static_cast<std::size_t>(view.width) * view.height);
  if (!cloud.points.empty() && !labels.empty())
    splat_points(cloud, labels, view, depth, cfg, buffer, threads);
  return buffer_to_raster(buffer, view.width, view.height,
                          channel == LabelChannel::semantic ? RasterKind::semantic
                                                            : RasterKind::instance);
}

LabelRaster project_instances_to_masks(const GlobalInstanceSet& global,
                                       const LabelRaster& consistent_sem,
                                       const std::set<std::uint16_t>& things,
                                       const CameraView& view, const DepthMap& depth,
                                       const ProjectionConfig& cfg, int threads) {
  if (consistent_sem.width != view.width || consistent_sem.height != view.height)
    throw std::invalid_argument("project_instances_to_masks: dimension mismatch");
  const LabeledPointCloud cloud = global.as_cloud();
  LabelRaster out =
      project_cloud_to_mask(cloud, view, depth, cfg, LabelChannel::instance, threads);
  for (std::size_t i = 0; i < out.labels.size(); ++i)
    if (!things.count(consistent_sem.labels[i])) out.labels[i] = kUnknownLabel;
  return out;
}

}  // namespace panfuse
