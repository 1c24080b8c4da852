#include "panfuse/semantic_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "panfuse/parallel.hpp"
#include "panfuse/rng.hpp"

namespace panfuse {

LabeledPointCloud lift_labels(std::span<const ViewFrame> frames, int stride) {
  if (stride < 1) throw std::invalid_argument("lift_labels: stride must be >= 1");
  LabeledPointCloud cloud;
  for (const ViewFrame& f : frames) {
    for (int v = 0; v < f.view->height; v += stride) {
      for (int u = 0; u < f.view->width; u += stride) {
        if (!f.depth->valid_at(u, v)) continue;
        const std::uint16_t label = f.sem->at(u, v);
        if (label == kUnknownLabel) continue;
        cloud.points.push_back(pixel_to_world(*f.view, {double(u), double(v)}, f.depth->at(u, v)));
        cloud.sem_labels.push_back(label);
        cloud.source_view.push_back(f.view->view_id);
      }
    }
  }
  return cloud;
}

namespace {

std::size_t nearest_center(const Vec3& p, const std::vector<Vec3>& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = (p - centers[c]).squaredNorm();
    if (d < best_d) {  // strict: ties stay on the lowest index
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Vec3> kmeanspp_seed(std::span<const Vec3> points, std::size_t k, Rng& rng) {
  std::vector<Vec3> centers;
  centers.reserve(k);
  centers.push_back(points[rng.uniform_index(points.size())]);
  std::vector<double> dist2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    dist2[i] = (points[i] - centers[0]).squaredNorm();
  while (centers.size() < k) {
    double total = 0.0;
    for (double d : dist2) total += d;
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng.uniform_index(points.size());  // all points duplicated
    } else {
      double target = rng.uniform() * total;
      pick = points.size() - 1;
      double acc = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += dist2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i)
      dist2[i] = std::min(dist2[i], (points[i] - centers.back()).squaredNorm());
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(std::span<const Vec3> points, const KMeansConfig& cfg, int threads) {
  if (points.empty()) throw std::invalid_argument("kmeans: empty point set");
  const std::size_t k = cfg.k;
  if (k < 1 || k > points.size())
    throw std::invalid_argument("kmeans: k must be in [1, point count]");

  Rng rng(cfg.seed);
  KMeansResult result;
  result.centers = kmeanspp_seed(points, k, rng);
  result.assignment.assign(points.size(), 0);

  std::vector<Vec3> sums(k);
  std::vector<std::size_t> counts(k);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    parallel_chunks(points.size(), 4096, threads, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        result.assignment[i] = static_cast<std::uint32_t>(nearest_center(points[i], result.centers));
    });

    double wcss = 0.0;
    std::fill(sums.begin(), sums.end(), Vec3::Zero());
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = result.assignment[i];
      sums[c] += points[i];
      counts[c] += 1;
      wcss += (points[i] - result.centers[c]).squaredNorm();
    }
    result.wcss_history.push_back(wcss);

    double max_move = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // handled below
      const Vec3 mean = sums[c] / static_cast<double>(counts[c]);
      max_move = std::max(max_move, (mean - result.centers[c]).norm());
      result.centers[c] = mean;
    }
    // Re-seed empty clusters on the point farthest from its current center
    // (lowest index on ties). Moving an unused center never raises the
    // objective.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = (points[i] - result.centers[result.assignment[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      result.centers[c] = points[far];
      max_move = std::numeric_limits<double>::infinity();
    }
    if (max_move < cfg.tol) break;
  }

  // Final pass so the reported assignment is nearest-center for the reported
  // centers, and each center is the mean of its final members.
  parallel_chunks(points.size(), 4096, threads, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      result.assignment[i] = static_cast<std::uint32_t>(nearest_center(points[i], result.centers));
  });
  std::fill(sums.begin(), sums.end(), Vec3::Zero());
  std::fill(counts.begin(), counts.end(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sums[result.assignment[i]] += points[i];
    counts[result.assignment[i]] += 1;
  }
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] > 0) result.centers[c] = sums[c] / static_cast<double>(counts[c]);
  return result;
}

std::vector<std::uint16_t> vote_cluster_labels(std::span<const std::uint32_t> assignment,
                                               std::span<const std::uint16_t> sem_labels,
                                               std::size_t k) {
  std::vector<std::map<std::uint16_t, std::size_t>> hist(k);
  for (std::size_t i = 0; i < assignment.size(); ++i)
    hist[assignment[i]][sem_labels[i]] += 1;
  std::vector<std::uint16_t> voted(k, kUnknownLabel);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best = 0;
    for (const auto& [label, count] : hist[c]) {
      if (count > best) {  // map iterates labels ascending, so ties keep the smaller id
        best = count;
        voted[c] = label;
      }
    }
  }
  return voted;
}

AnchorGrid voxelize(const LabeledPointCloud& cloud, double voxel_size) {
  if (voxel_size <= 0.0) throw std::invalid_argument("voxelize: voxel size must be positive");
  using Key = std::array<long, 3>;
  std::map<Key, std::map<std::uint16_t, std::size_t>> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    Key key{round_half_up(p.x() / voxel_size), round_half_up(p.y() / voxel_size),
            round_half_up(p.z() / voxel_size)};
    cells[key][cloud.sem_labels[i]] += 1;
  }
  AnchorGrid grid;
  grid.voxel_size = voxel_size;
  grid.anchors.reserve(cells.size());
  grid.anchor_sem.reserve(cells.size());
  for (const auto& [key, hist] : cells) {
    grid.anchors.emplace_back(key[0] * voxel_size, key[1] * voxel_size, key[2] * voxel_size);
    std::uint16_t label = kUnknownLabel;
    std::size_t best = 0;
    for (const auto& [l, count] : hist) {
      if (count > best) {
        best = count;
        label = l;
      }
    }
    grid.anchor_sem.push_back(label);
  }
  return grid;
}

SemanticCloudResult build_semantic_cloud(std::span<const ViewFrame> frames,
                                         const BuildCloudConfig& cfg, int threads) {
  if (frames.empty()) throw std::invalid_argument("build_semantic_cloud: no views");

  std::vector<LabelRaster> filtered;
  std::vector<ViewFrame> lift_frames(frames.begin(), frames.end());
  if (cfg.window.window_size > 0) {
    std::vector<int> order;
    order.reserve(frames.size());
    for (const ViewFrame& f : frames) order.push_back(f.view->view_id);
    filtered.resize(frames.size());
    parallel_chunks(frames.size(), 1, threads, [&](std::size_t i, std::size_t, std::size_t) {
      std::vector<ViewFrame> neighbors;
      for (int id : neighbor_views(order[i], order, cfg.window)) {
        const auto it = std::find(order.begin(), order.end(), id);
        neighbors.push_back(frames[it - order.begin()]);
      }
      const ConsistencyMask q = consistency_mask(frames[i], neighbors, cfg.window);
      filtered[i] = apply_consistency(*frames[i].sem, q);
    });
    for (std::size_t i = 0; i < frames.size(); ++i) lift_frames[i].sem = &filtered[i];
  }

  SemanticCloudResult result;
  LabeledPointCloud lifted = lift_labels(lift_frames, cfg.stride);
  result.lifted_points = lifted.size();
  if (lifted.points.empty()) {
    result.anchors.voxel_size = cfg.voxel_size;
    return result;
  }

  KMeansConfig kcfg = cfg.kmeans;
  if (kcfg.k == 0) {
    // Point-budget heuristic: one cluster per ~200 points, capped by the
    // voxel capacity of the cloud's bounding box.
    Vec3 lo = lifted.points[0], hi = lifted.points[0];
    for (const Vec3& p : lifted.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const double eps3 = cfg.voxel_size * cfg.voxel_size * cfg.voxel_size;
    const double volume = std::max((hi - lo).prod(), eps3);
    const auto cap = static_cast<std::size_t>(std::max(1.0, 50.0 * volume / eps3));
    kcfg.k = std::min((lifted.size() + 199) / 200, cap);
  }
  kcfg.k = std::min(kcfg.k, lifted.size());

  const KMeansResult km = kmeans(lifted.points, kcfg, threads);
  const std::vector<std::uint16_t> voted =
      vote_cluster_labels(km.assignment, lifted.sem_labels, kcfg.k);
  for (std::size_t c = 0; c < kcfg.k; ++c) {
    if (voted[c] == kUnknownLabel) continue;  // empty cluster carries no label
    result.centers.points.push_back(km.centers[c]);
    result.centers.sem_labels.push_back(voted[c]);
  }
  result.anchors = voxelize(result.centers, cfg.voxel_size);
  return result;
}

}  // namespace panfuse
