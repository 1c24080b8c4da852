#include "panfuse/pseudo_label.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace panfuse {

RegionMap region_grow(const LabelRaster& mask, int connectivity, int min_region_px) {
  if (connectivity != 4 && connectivity != 8)
    throw std::invalid_argument("region_grow: connectivity must be 4 or 8");
  const int w = mask.width, h = mask.height;
  RegionMap regions;
  regions.width = w;
  regions.height = h;
  regions.region_of.assign(static_cast<std::size_t>(w) * h, -1);

  static constexpr int du8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dv8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int num_dirs = connectivity == 4 ? 4 : 8;

  std::vector<std::size_t> stack;
  std::vector<std::size_t> member;
  for (int v0 = 0; v0 < h; ++v0) {
    for (int u0 = 0; u0 < w; ++u0) {
      const std::size_t start = static_cast<std::size_t>(v0) * w + u0;
      if (regions.region_of[start] != -1) continue;
      const std::uint16_t label = mask.labels[start];
      if (label == kUnknownLabel) continue;

      member.clear();
      stack.assign(1, start);
      regions.region_of[start] = -2;  // visited marker for this flood
      while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        member.push_back(idx);
        const int u = static_cast<int>(idx % w), v = static_cast<int>(idx / w);
        for (int d = 0; d < num_dirs; ++d) {
          const int nu = u + du8[d], nv = v + dv8[d];
          if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
          const std::size_t nidx = static_cast<std::size_t>(nv) * w + nu;
          if (regions.region_of[nidx] != -1) continue;
          if (mask.labels[nidx] != label) continue;
          regions.region_of[nidx] = -2;
          stack.push_back(nidx);
        }
      }
      const std::int32_t id =
          member.size() >= static_cast<std::size_t>(min_region_px) ? regions.count++ : -1;
      for (std::size_t idx : member) regions.region_of[idx] = id;
    }
  }
  return regions;
}

LabelRaster fuse_pseudo_label(const LabelRaster& m2f, const LabelRaster& reference,
                              int connectivity, int min_region_px) {
  if (!m2f.same_shape(reference))
    throw std::invalid_argument("fuse_pseudo_label: dimension mismatch");

  const RegionMap regions = region_grow(m2f, connectivity, min_region_px);
  std::vector<std::map<std::uint16_t, std::size_t>> votes(regions.count);
  std::vector<std::uint16_t> own_label(regions.count, kUnknownLabel);
  for (std::size_t i = 0; i < m2f.labels.size(); ++i) {
    const std::int32_t r = regions.region_of[i];
    if (r < 0) continue;
    own_label[r] = m2f.labels[i];
    if (reference.labels[i] != kUnknownLabel) votes[r][reference.labels[i]] += 1;
  }

  std::vector<std::uint16_t> fused(regions.count);
  for (std::int32_t r = 0; r < regions.count; ++r) {
    if (votes[r].empty()) {  // reference covers nothing here
      fused[r] = own_label[r];
      continue;
    }
    std::size_t best = 0;
    for (const auto& [label, count] : votes[r]) best = std::max(best, count);
    // Among the tied top classes, prefer the region's own label, else the
    // smallest id (first in the ordered map).
    std::uint16_t winner = kUnknownLabel;
    for (const auto& [label, count] : votes[r]) {
      if (count != best) continue;
      if (winner == kUnknownLabel) winner = label;
      if (label == own_label[r]) {
        winner = label;
        break;
      }
    }
    fused[r] = winner;
  }

  LabelRaster out = m2f;  // pixels outside any region pass through
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const std::int32_t r = regions.region_of[i];
    if (r >= 0) out.labels[i] = fused[r];
  }
  return out;
}

}  // namespace panfuse
