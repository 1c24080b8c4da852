#pragma once

#include <optional>
#include <vector>

#include "panfuse/common.hpp"

namespace panfuse {

/// Continuous pixel coordinates; u runs along the width, v along the height.
/// Integer pixel (i, j) sits exactly at (u, v) = (i, j). May lie outside the
/// image bounds; callers check.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole camera for one viewpoint: intrinsics plus a rigid world-from-camera
/// pose. The camera frame is the usual CV one (x right, y down, z forward);
/// depth values are camera-frame z, not ray length.
struct CameraView {
  int view_id = 0;
  int width = 0;
  int height = 0;
  Mat3 k_matrix = Mat3::Identity();
  Mat4 cam_to_world = Mat4::Identity();
  Mat4 world_to_cam = Mat4::Identity();

  /// Validates intrinsics and pose (orthonormal rotation, positive focal
  /// lengths, principal point inside the image) and caches the inverse pose.
  /// Throws std::invalid_argument on violation.
  static CameraView create(int view_id, int width, int height, const Mat3& k,
                           const Mat4& cam_to_world);

  Vec3 camera_center() const { return cam_to_world.block<3, 1>(0, 3); }
  bool contains(int u, int v) const { return u >= 0 && u < width && v >= 0 && v < height; }
};

/// Dense per-pixel depth in meters. NaN marks invalid pixels; every non-NaN
/// value is positive and finite.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // row-major

  static DepthMap constant(int width, int height, float depth);

  float at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  bool valid_at(int u, int v) const { return std::isfinite(at(u, v)); }
};

/// Lifts a pixel with known depth to world coordinates:
/// cam_to_world * (depth * K^-1 * [u, v, 1]).
/// Throws std::invalid_argument unless depth is finite and positive.
Vec3 pixel_to_world(const CameraView& view, PixelCoord px, double depth);

struct PixelProjection {
  PixelCoord px;
  double z_ref = 0.0;  // camera-frame z of the projected point
};

/// Projects a world point into the view. Empty result means the point lies
/// behind the camera (z <= 0); that is a value, not an error.
std::optional<PixelProjection> world_to_pixel(const CameraView& view, const Vec3& p);

enum class WarpStatus { ok, out_of_view, occluded };

struct WarpResult {
  WarpStatus status = WarpStatus::out_of_view;
  int u = 0;  // destination pixel, valid when status == ok
  int v = 0;
  double z_ref = 0.0;
};

/// Warps a source pixel into the destination view via its depth: lift to
/// world, reproject, snap to the nearest integer pixel. The warped pixel
/// counts as visible only when its depth agrees with the destination depth
/// map at the landing pixel within occlusion_tol; disagreement (or missing
/// destination depth) reports `occluded`.
/// Throws std::invalid_argument when the source depth at px is invalid.
WarpResult warp_pixel(const CameraView& src, const DepthMap& src_depth, PixelCoord px,
                      const CameraView& dst, const DepthMap& dst_depth, double occlusion_tol);

}  // namespace panfuse
