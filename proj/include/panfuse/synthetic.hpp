#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "panfuse/geometry.hpp"
#include "panfuse/raster.hpp"

namespace panfuse {

enum class ShapeKind { box, sphere };

struct Primitive {
  ShapeKind kind = ShapeKind::box;
  Vec3 center = Vec3::Zero();
  double yaw = 0.0;                 // boxes only, about z
  Vec3 half_extents = Vec3::Zero(); // spheres use x as the radius
  std::uint16_t sem_class = 0;
  std::uint16_t instance_id = 0;
};

enum class TrajectoryKind { orbit, corridor };

/// Procedural desk-scale scene: analytic primitives floating inside a box
/// room, plus a deterministic camera trajectory. Everything renders in
/// closed form so geometric ground truth is exact.
struct SceneSpec {
  std::uint64_t seed = 1;
  Vec3 room_half_extents = Vec3(3.0, 3.0, 1.5);
  std::vector<Primitive> primitives;
  std::uint16_t wall_class = 0;
  std::uint16_t floor_class = 1;
  TrajectoryKind trajectory = TrajectoryKind::orbit;
  int view_count = 20;
  int width = 640;
  int height = 480;
  double fx = 0.0;  // pixels; 0 defers to a 60-degree horizontal field of view
  double fy = 0.0;  // pixels; 0 copies fx

  // orbit: cameras on a circle looking at a fixed target
  double orbit_radius = 2.2;
  double orbit_height = 0.4;
  Vec3 orbit_target = Vec3(0.0, 0.0, 0.1);

  // corridor: cameras slide between two points, looking along +y
  Vec3 corridor_start = Vec3(-2.5, -1.2, 0.0);
  Vec3 corridor_end = Vec3(2.5, -1.2, 0.0);

  std::set<std::uint16_t> things_classes() const;
};

/// Throws std::invalid_argument when primitives overlap (1 cm margin),
/// instance ids repeat, or some camera leaves the room.
void validate_scene(const SceneSpec& spec);

CameraView camera_for_view(const SceneSpec& spec, int view_index);

struct RenderedView {
  DepthMap depth;
  LabelRaster sem;
  LabelRaster inst;
};

/// Per-pixel ray casting against the primitives and the room shell; the
/// nearest hit wins and depth is its camera-frame z.
RenderedView render_gt(const SceneSpec& spec, int view_index, int threads = 1);

/// Signed distance from a point to a primitive's surface (negative inside).
double primitive_sdf(const Primitive& prim, const Vec3& p);

/// Segment-level label corruption imitating machine-mask noise: whole-segment
/// class flips, per-view instance id permutation, boundary dilation/erosion,
/// and whole-segment dropout. Deterministic given (seed, view_index); the
/// random streams are keyed per segment.
struct NoiseSpec {
  std::uint64_t seed = 1;
  double flip_prob = 0.0;
  bool permute_instances = false;
  int boundary_jitter_px = 0;
  double dropout_prob = 0.0;
  std::uint16_t num_classes = 21;
  std::uint16_t max_instances = 25;
};

struct NoisyView {
  LabelRaster sem;
  LabelRaster inst;
};

NoisyView inject_noise(const LabelRaster& sem, const LabelRaster& inst, const NoiseSpec& spec,
                       int view_index);

// Deterministic scene presets shared by the CLI and the test suites.
SceneSpec make_orbit_scene(std::uint64_t seed, int view_count, int width, int height,
                           int object_count);
SceneSpec make_corridor_scene(std::uint64_t seed, int view_count, int width, int height,
                              int object_count);

}  // namespace panfuse
