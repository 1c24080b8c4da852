#include "panfuse/obb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace panfuse {

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Linear-interpolated quantile of a sorted sample, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<Vec2> ObbZ::footprint() const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec2 axis_u(c, s), axis_v(-s, c);
  const Vec2 center_xy(center.x(), center.y());
  const Vec2 du = axis_u * half_extents.x();
  const Vec2 dv = axis_v * half_extents.y();
  return {center_xy - du - dv, center_xy + du - dv, center_xy + du + dv, center_xy - du + dv};
}

bool ObbZ::contains(const Vec3& p, double tol) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const double dx = p.x() - center.x(), dy = p.y() - center.y();
  const double lu = c * dx + s * dy;
  const double lv = -s * dx + c * dy;
  return std::abs(lu) <= half_extents.x() + tol && std::abs(lv) <= half_extents.y() + tol &&
         std::abs(p.z() - center.z()) <= half_extents.z() + tol;
}

std::vector<Vec2> convex_hull_xy(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) { return a == b; }),
               points.end());
  const std::size_t n = points.size();
  if (n < 3) return points;
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper chain
    while (k >= t && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

MinAreaRect min_area_rect(const std::vector<Vec2>& hull) {
  MinAreaRect best;
  double best_area = std::numeric_limits<double>::infinity();
  const std::size_t n = hull.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 edge = hull[i] - hull[j];
    const double len = edge.norm();
    if (len == 0.0) continue;
    edge /= len;
    const Vec2 perp(-edge.y(), edge.x());
    double min_u = 0, max_u = 0, min_v = 0, max_v = 0;
    for (const Vec2& p : hull) {
      const Vec2 d = p - hull[j];
      min_u = std::min(min_u, d.dot(edge));
      max_u = std::max(max_u, d.dot(edge));
      min_v = std::min(min_v, d.dot(perp));
      max_v = std::max(max_v, d.dot(perp));
    }
    const double area = (max_u - min_u) * (max_v - min_v);
    if (area < best_area) {
      best_area = area;
      best.angle = std::atan2(edge.y(), edge.x());
      best.half_u = (max_u - min_u) / 2.0;
      best.half_v = (max_v - min_v) / 2.0;
      best.center = hull[j] + edge * (min_u + max_u) / 2.0 + perp * (min_v + max_v) / 2.0;
    }
  }
  return best;
}

namespace {

ObbZ axis_aligned_fallback(std::span<const Vec3> points) {
  ObbZ box;
  box.degenerate = true;
  if (points.empty()) return box;
  Vec3 lo = points[0], hi = points[0];
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  box.center = (lo + hi) / 2.0;
  box.half_extents = (hi - lo) / 2.0;
  return box;
}

void canonicalize_yaw(ObbZ& box) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  double yaw = std::fmod(box.yaw, std::numbers::pi);
  if (yaw < 0.0) yaw += std::numbers::pi;
  if (yaw >= half_pi) {
    yaw -= half_pi;
    std::swap(box.half_extents.x(), box.half_extents.y());
  }
  if (yaw >= half_pi) yaw = 0.0;  // fmod landed exactly on the boundary
  box.yaw = yaw;
}

}  // namespace

ObbZ fit_obb_z(std::span<const Vec3> points, double trim_pct) {
  std::vector<Vec3> kept(points.begin(), points.end());
  if (trim_pct > 0.0 && kept.size() >= 3) {
    Vec3 lo, hi;
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<double> coords(kept.size());
      for (std::size_t i = 0; i < kept.size(); ++i) coords[i] = kept[i][axis];
      std::sort(coords.begin(), coords.end());
      lo[axis] = quantile_sorted(coords, trim_pct / 2.0);
      hi[axis] = quantile_sorted(coords, 1.0 - trim_pct / 2.0);
    }
    std::vector<Vec3> inside;
    inside.reserve(kept.size());
    for (const Vec3& p : kept)
      if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all())
        inside.push_back(p);
    if (inside.size() >= 3) kept = std::move(inside);
  }
  if (kept.size() < 3) return axis_aligned_fallback(kept);

  std::vector<Vec2> xy(kept.size());
  double z_min = kept[0].z(), z_max = kept[0].z();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    xy[i] = Vec2(kept[i].x(), kept[i].y());
    z_min = std::min(z_min, kept[i].z());
    z_max = std::max(z_max, kept[i].z());
  }
  const std::vector<Vec2> hull = convex_hull_xy(std::move(xy));
  if (hull.size() < 3) {
    ObbZ box = axis_aligned_fallback(kept);
    return box;
  }

  const MinAreaRect rect = min_area_rect(hull);
  ObbZ box;
  box.center = Vec3(rect.center.x(), rect.center.y(), (z_min + z_max) / 2.0);
  box.yaw = rect.angle;
  box.half_extents = Vec3(rect.half_u, rect.half_v, (z_max - z_min) / 2.0);
  canonicalize_yaw(box);
  return box;
}

std::vector<Vec2> clip_convex_polygon(const std::vector<Vec2>& subject,
                                      const std::vector<Vec2>& clip) {
  std::vector<Vec2> output = subject;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % m];
    std::vector<Vec2> input;
    input.swap(output);
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + n - 1) % n];
      const double side_cur = cross2(a, b, cur);
      const double side_prev = cross2(a, b, prev);
      const bool in_cur = side_cur >= 0.0;
      const bool in_prev = side_prev >= 0.0;
      if (in_cur != in_prev) {
        const double t = side_prev / (side_prev - side_cur);
        output.push_back(prev + t * (cur - prev));
      }
      if (in_cur) output.push_back(cur);
    }
  }
  return output;
}

double polygon_area(const std::vector<Vec2>& polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    twice += polygon[j].x() * polygon[i].y() - polygon[i].x() * polygon[j].y();
  return std::abs(twice) / 2.0;
}

double box_intersection_volume(const ObbZ& a, const ObbZ& b) {
  const double z_lo = std::max(a.center.z() - a.half_extents.z(), b.center.z() - b.half_extents.z());
  const double z_hi = std::min(a.center.z() + a.half_extents.z(), b.center.z() + b.half_extents.z());
  if (z_hi <= z_lo) return 0.0;
  const std::vector<Vec2> overlap = clip_convex_polygon(a.footprint(), b.footprint());
  if (overlap.size() < 3) return 0.0;
  return polygon_area(overlap) * (z_hi - z_lo);
}

double box_iou(const ObbZ& a, const ObbZ& b, IouMode mode) {
  const double va = a.volume(), vb = b.volume();
  if (va + vb <= 0.0) return 0.0;
  const double inter = box_intersection_volume(a, b);
  if (mode == IouMode::paper) return inter / (va + vb);
  return inter / (va + vb - inter);
}

double box_iom(const ObbZ& a, const ObbZ& b) {
  const double smaller = std::min(a.volume(), b.volume());
  if (smaller <= 0.0) return 0.0;
  return box_intersection_volume(a, b) / smaller;
}

}  // namespace panfuse
