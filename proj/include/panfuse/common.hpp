#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>

namespace panfuse {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Label value marking pixels/points that carry no information.
inline constexpr std::uint16_t kUnknownLabel = 65535;

/// Rounding used everywhere a continuous coordinate is snapped to a grid:
/// ties at .5 go up (floor(x + 0.5)), also for negative inputs.
inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

inline std::string view_name(int view_id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", view_id);
  return buf;
}

}  // namespace panfuse
