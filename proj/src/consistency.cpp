#include "panfuse/consistency.hpp"

#include <algorithm>
#include <stdexcept>

#include "panfuse/parallel.hpp"

namespace panfuse {

std::vector<int> neighbor_views(int ref_view_id, const std::vector<int>& ordered_view_ids,
                                const WindowConfig& cfg) {
  auto it = std::find(ordered_view_ids.begin(), ordered_view_ids.end(), ref_view_id);
  if (it == ordered_view_ids.end())
    throw std::invalid_argument("neighbor_views: reference view not in sequence");
  const int n = static_cast<int>(ordered_view_ids.size());
  const int ref = static_cast<int>(it - ordered_view_ids.begin());
  const int want = std::min(cfg.window_size, n - 1);

  int before = std::min(want / 2, ref);
  int after = std::min(want - before, n - 1 - ref);
  before = std::min(want - after, ref);  // spill leftover onto the other side

  std::vector<int> out;
  out.reserve(want);
  for (int i = ref - before; i <= ref + after; ++i)
    if (i != ref) out.push_back(ordered_view_ids[i]);
  return out;
}

ConsistencyMask consistency_mask(const ViewFrame& ref, std::span<const ViewFrame> neighbors,
                                 const WindowConfig& cfg, int threads) {
  const int w = ref.view->width, h = ref.view->height;
  if (ref.depth->width != w || ref.depth->height != h || ref.sem->width != w ||
      ref.sem->height != h)
    throw std::invalid_argument("consistency_mask: reference rasters do not match the camera");
  for (const ViewFrame& nb : neighbors) {
    if (nb.depth->width != nb.view->width || nb.depth->height != nb.view->height ||
        nb.sem->width != nb.view->width || nb.sem->height != nb.view->height)
      throw std::invalid_argument("consistency_mask: neighbor rasters do not match their camera");
  }

  ConsistencyMask mask;
  mask.width = w;
  mask.height = h;
  mask.q.assign(static_cast<std::size_t>(w) * h, 0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (ref.depth->valid_at(u, v) && ref.sem->at(u, v) != kUnknownLabel)
        mask.q[static_cast<std::size_t>(v) * w + u] = 1;

  // Each neighbor warps into its own disagreement buffer; the buffers are
  // ANDed in sequence order afterwards, so the merge is independent of the
  // thread count.
  std::vector<std::vector<std::uint8_t>> disagree(neighbors.size());
  parallel_chunks(neighbors.size(), 1, threads, [&](std::size_t i, std::size_t, std::size_t) {
    const ViewFrame& nb = neighbors[i];
    auto& buf = disagree[i];
    buf.assign(static_cast<std::size_t>(w) * h, 0);
    for (int nv = 0; nv < nb.view->height; ++nv) {
      for (int nu = 0; nu < nb.view->width; ++nu) {
        if (!nb.depth->valid_at(nu, nv)) continue;
        const std::uint16_t s_u = nb.sem->at(nu, nv);
        if (s_u == kUnknownLabel) continue;  // absent evidence never vetoes
        const WarpResult warp =
            warp_pixel(*nb.view, *nb.depth, {double(nu), double(nv)}, *ref.view, *ref.depth,
                       cfg.occlusion_tol);
        if (warp.status != WarpStatus::ok) continue;
        if (ref.sem->at(warp.u, warp.v) != s_u)
          buf[static_cast<std::size_t>(warp.v) * w + warp.u] = 1;
      }
    }
  });
  for (const auto& buf : disagree)
    for (std::size_t i = 0; i < mask.q.size(); ++i)
      if (buf[i]) mask.q[i] = 0;
  return mask;
}

LabelRaster apply_consistency(const LabelRaster& mask, const ConsistencyMask& q) {
  if (mask.width != q.width || mask.height != q.height)
    throw std::invalid_argument("apply_consistency: dimension mismatch");
  LabelRaster out = mask;
  for (std::size_t i = 0; i < out.labels.size(); ++i)
    if (!q.q[i]) out.labels[i] = kUnknownLabel;
  return out;
}

}  // namespace panfuse
