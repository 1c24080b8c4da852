#pragma once

#include <span>
#include <vector>

#include "panfuse/common.hpp"

namespace panfuse {

/// Bounding box free to rotate only about the vertical (z) axis. Yaw is
/// canonicalized into [0, pi/2): rotating a rectangle by a quarter turn and
/// swapping its extents describes the same box.
struct ObbZ {
  Vec3 center = Vec3::Zero();
  double yaw = 0.0;
  Vec3 half_extents = Vec3::Zero();
  bool degenerate = false;  // set by the fallback path for unusable inputs

  double volume() const { return 8.0 * half_extents.x() * half_extents.y() * half_extents.z(); }

  /// The four XY footprint corners in counter-clockwise order.
  std::vector<Vec2> footprint() const;

  bool contains(const Vec3& p, double tol = 0.0) const;
};

/// Fits a minimum-area z-yawed box: per-axis percentile trimming, convex hull
/// of the XY projection, rotating-calipers rectangle, z extent from min/max.
/// Fewer than 3 usable points or an XY-degenerate set falls back to an
/// axis-aligned box flagged degenerate.
ObbZ fit_obb_z(std::span<const Vec3> points, double trim_pct);

enum class IouMode {
  paper,     // intersection / (vol(a) + vol(b)); ranges over [0, 0.5]
  standard,  // intersection / union
};

double box_intersection_volume(const ObbZ& a, const ObbZ& b);
double box_iou(const ObbZ& a, const ObbZ& b, IouMode mode = IouMode::paper);
double box_iom(const ObbZ& a, const ObbZ& b);

// 2D helpers shared with the box math; exposed for direct testing.
std::vector<Vec2> convex_hull_xy(std::vector<Vec2> points);
std::vector<Vec2> clip_convex_polygon(const std::vector<Vec2>& subject,
                                      const std::vector<Vec2>& clip);
double polygon_area(const std::vector<Vec2>& polygon);

struct MinAreaRect {
  Vec2 center = Vec2::Zero();
  double angle = 0.0;  // direction of the first axis, radians
  double half_u = 0.0;
  double half_v = 0.0;
};

/// Smallest-area enclosing rectangle of a convex hull (some side of the
/// optimum is collinear with a hull edge, so sweeping hull edges suffices).
MinAreaRect min_area_rect(const std::vector<Vec2>& hull);

}  // namespace panfuse
