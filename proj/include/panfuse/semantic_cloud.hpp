#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "panfuse/consistency.hpp"
#include "panfuse/raster.hpp"

namespace panfuse {

struct KMeansConfig {
  std::size_t k = 0;          // 0 selects a count from the point budget heuristic
  int max_iters = 25;
  double tol = 1e-4;          // meters of center movement
  std::uint64_t seed = 1;
};

struct KMeansResult {
  std::vector<Vec3> centers;
  std::vector<std::uint32_t> assignment;    // per point, index into centers
  std::vector<double> wcss_history;         // objective after each iteration
};

/// Voxel-grid anchors: positions snapped to integer multiples of voxel_size,
/// deduplicated, each carrying a voted semantic label.
struct AnchorGrid {
  double voxel_size = 0.0;
  std::vector<Vec3> anchors;
  std::vector<std::uint16_t> anchor_sem;
};

/// Lifts every known-label, valid-depth pixel on a stride grid to a labeled
/// 3D point. Point order follows view order, then row-major pixel order.
LabeledPointCloud lift_labels(std::span<const ViewFrame> frames, int stride);

/// Lloyd iterations from seeded k-means++ starts. Terminates when the largest
/// center movement drops below tol or after max_iters. Assignment ties go to
/// the lowest center index; clusters that empty out are re-seeded on the
/// point farthest from its center. Fixed seed gives bit-identical output.
KMeansResult kmeans(std::span<const Vec3> points, const KMeansConfig& cfg, int threads = 1);

/// Majority label per cluster; ties break to the smallest label id, empty
/// clusters vote unknown.
std::vector<std::uint16_t> vote_cluster_labels(std::span<const std::uint32_t> assignment,
                                               std::span<const std::uint16_t> sem_labels,
                                               std::size_t k);

/// Snaps points to a voxel grid (round-half-up per axis) and deduplicates.
/// Each anchor's label is the mode of the labels that landed in its voxel.
AnchorGrid voxelize(const LabeledPointCloud& cloud, double voxel_size);

struct BuildCloudConfig {
  WindowConfig window;
  KMeansConfig kmeans;
  double voxel_size = 0.05;
  int stride = 4;
};

struct SemanticCloudResult {
  LabeledPointCloud centers;  // cluster centers carrying voted labels
  AnchorGrid anchors;
  std::size_t lifted_points = 0;
};

/// Full chain: consistency-filter each view against its window (skipped when
/// window_size == 0), lift to 3D, cluster, vote, voxelize.
SemanticCloudResult build_semantic_cloud(std::span<const ViewFrame> frames,
                                         const BuildCloudConfig& cfg, int threads = 1);

}  // namespace panfuse
