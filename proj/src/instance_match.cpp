#include "panfuse/instance_match.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <stdexcept>

#include "panfuse/hungarian.hpp"
#include "panfuse/rng.hpp"

namespace panfuse {

LabeledPointCloud GlobalInstanceSet::as_cloud() const {
  LabeledPointCloud cloud;
  for (std::size_t id = 0; id < entries_.size(); ++id) {
    for (const Vec3& p : entries_[id].points) {
      cloud.points.push_back(p);
      cloud.sem_labels.push_back(kUnknownLabel);
      cloud.inst_labels.push_back(static_cast<std::uint16_t>(id));
    }
  }
  return cloud;
}

namespace {

/// Reservoir-samples the vector down to cap elements, keeping encounter
/// order stable for the survivors of the pass.
void reservoir_cap(std::vector<Vec3>& points, std::size_t cap, std::uint64_t stream) {
  if (points.size() <= cap) return;
  Rng rng(stream);
  std::vector<Vec3> keep(points.begin(), points.begin() + cap);
  for (std::size_t i = cap; i < points.size(); ++i) {
    const std::uint64_t j = rng.uniform_index(i + 1);
    if (j < cap) keep[j] = points[i];
  }
  points = std::move(keep);
}

double pair_cost(const ObbZ& local, const ObbZ& global, const MatchConfig& cfg) {
  switch (cfg.cost_mode) {
    case CostMode::iou_only:
      return -box_iou(local, global, cfg.iou_mode);
    case CostMode::iom_only:
      return -box_iom(local, global);
    case CostMode::iou_plus_iom:
    default:
      return -box_iou(local, global, cfg.iou_mode) - box_iom(local, global);
  }
}

}  // namespace

UpdateStats update_global_set(GlobalInstanceSet& global, const CameraView& view,
                              const DepthMap& depth, const LabelRaster& inst_mask,
                              const LabelRaster& sem_mask, const std::set<std::uint16_t>& things,
                              const MatchConfig& cfg) {
  if (inst_mask.width != view.width || inst_mask.height != view.height ||
      !inst_mask.same_shape(sem_mask) || depth.width != view.width ||
      depth.height != view.height)
    throw std::invalid_argument("update_global_set: dimension mismatch");

  // Gather things-class instance segments, ascending by instance id.
  std::map<std::uint16_t, std::vector<Vec3>> segments;
  for (int v = 0; v < view.height; ++v) {
    for (int u = 0; u < view.width; ++u) {
      const std::uint16_t inst = inst_mask.at(u, v);
      if (inst == kUnknownLabel) continue;
      if (!things.count(sem_mask.at(u, v))) continue;
      if (!depth.valid_at(u, v)) continue;
      segments[inst].push_back(pixel_to_world(view, {double(u), double(v)}, depth.at(u, v)));
    }
  }

  struct Local {
    std::vector<Vec3> points;
    ObbZ box;
  };
  std::vector<Local> locals;
  for (auto& [id, points] : segments) {
    if (points.size() < static_cast<std::size_t>(cfg.min_segment_px)) continue;
    Local l;
    l.box = fit_obb_z(points, cfg.trim_pct);
    l.points = std::move(points);
    locals.push_back(std::move(l));
  }

  UpdateStats stats;
  stats.segments = static_cast<int>(locals.size());
  if (locals.empty()) return stats;

  const auto stream = [&](std::size_t entry_id) {
    return mix_seed(cfg.seed, static_cast<std::uint64_t>(view.view_id), entry_id);
  };

  std::vector<std::size_t> fresh;  // indices into locals that need a new id
  if (global.size() == 0) {
    for (std::size_t i = 0; i < locals.size(); ++i) fresh.push_back(i);
  } else {
    const std::size_t nl = locals.size(), ng = global.size();
    std::vector<double> cost(nl * ng);
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t g = 0; g < ng; ++g)
        cost[l * ng + g] = pair_cost(locals[l].box, global.entry(g).box, cfg);
    const HungarianResult match =
        solve_assignment(static_cast<int>(nl), static_cast<int>(ng), cost);

    std::vector<int> matched_col(nl, -1);
    for (const auto& [row, col] : match.pairs) matched_col[row] = col;
    for (std::size_t l = 0; l < nl; ++l) {
      const int g = matched_col[l];
      if (g < 0 || cost[l * ng + g] > cfg.tau_new) {
        fresh.push_back(l);
        continue;
      }
      auto& entry = global.entries()[g];
      entry.points.insert(entry.points.end(), locals[l].points.begin(), locals[l].points.end());
      reservoir_cap(entry.points, cfg.point_cap, stream(static_cast<std::size_t>(g)));
      entry.box = fit_obb_z(entry.points, cfg.trim_pct);
      ++stats.merged;
    }
  }

  // Append new instances in segment order. If the id space cannot hold them
  // all, the lowest-volume candidates are the ones dropped.
  const std::size_t room = global.max_instances() - std::min(global.max_instances(), global.size());
  if (fresh.size() > room) {
    std::vector<std::size_t> by_volume = fresh;
    std::stable_sort(by_volume.begin(), by_volume.end(), [&](std::size_t a, std::size_t b) {
      return locals[a].box.volume() > locals[b].box.volume();
    });
    const std::set<std::size_t> kept(by_volume.begin(), by_volume.begin() + room);
    std::vector<std::size_t> surviving;
    for (std::size_t l : fresh) {
      if (kept.count(l)) {
        surviving.push_back(l);
      } else {
        std::cerr << "update_global_set: view " << view.view_id
                  << ": dropping new segment (instance id space full at "
                  << global.max_instances() << ")\n";
        ++stats.dropped;
      }
    }
    fresh = std::move(surviving);
  }
  for (std::size_t l : fresh) {
    GlobalInstanceSet::Entry entry;
    entry.points = std::move(locals[l].points);
    reservoir_cap(entry.points, cfg.point_cap, stream(global.size()));
    entry.box = fit_obb_z(entry.points, cfg.trim_pct);
    global.entries().push_back(std::move(entry));
    ++stats.added;
  }
  return stats;
}

LabelRaster match_masks_2d(const LabelRaster& rendered, const LabelRaster& m2f,
                           std::size_t max_instances) {
  if (!rendered.same_shape(m2f))
    throw std::invalid_argument("match_masks_2d: dimension mismatch");

  std::map<std::uint16_t, std::size_t> rend_size, m2f_size;
  std::map<std::pair<std::uint16_t, std::uint16_t>, std::size_t> overlap;
  for (std::size_t i = 0; i < m2f.labels.size(); ++i) {
    const std::uint16_t r = rendered.labels[i], m = m2f.labels[i];
    if (r != kUnknownLabel) rend_size[r] += 1;
    if (m != kUnknownLabel) m2f_size[m] += 1;
    if (r != kUnknownLabel && m != kUnknownLabel) overlap[{m, r}] += 1;
  }

  std::vector<std::uint16_t> m2f_ids, rend_ids;
  for (const auto& [id, _] : m2f_size) m2f_ids.push_back(id);
  for (const auto& [id, _] : rend_size) rend_ids.push_back(id);

  std::vector<double> cost(m2f_ids.size() * rend_ids.size(), 0.0);
  for (std::size_t i = 0; i < m2f_ids.size(); ++i) {
    for (std::size_t j = 0; j < rend_ids.size(); ++j) {
      const auto it = overlap.find({m2f_ids[i], rend_ids[j]});
      if (it == overlap.end()) continue;
      const double inter = static_cast<double>(it->second);
      const double uni =
          static_cast<double>(m2f_size[m2f_ids[i]] + rend_size[rend_ids[j]]) - inter;
      cost[i * rend_ids.size() + j] = -inter / uni;
    }
  }
  const HungarianResult match = solve_assignment(static_cast<int>(m2f_ids.size()),
                                                 static_cast<int>(rend_ids.size()), cost);

  std::map<std::uint16_t, std::uint16_t> relabel;
  std::set<std::uint16_t> taken(rend_ids.begin(), rend_ids.end());
  for (const auto& [row, col] : match.pairs) relabel[m2f_ids[row]] = rend_ids[col];
  for (std::uint16_t id : m2f_ids) {
    if (relabel.count(id)) continue;
    std::uint16_t fresh = kUnknownLabel;
    for (std::uint16_t cand = 0; cand < max_instances; ++cand) {
      if (!taken.count(cand)) {
        fresh = cand;
        break;
      }
    }
    if (fresh != kUnknownLabel) taken.insert(fresh);
    relabel[id] = fresh;
  }

  LabelRaster out = m2f;
  out.kind = RasterKind::instance;
  for (auto& label : out.labels)
    if (label != kUnknownLabel) label = relabel[label];
  return out;
}

}  // namespace panfuse
