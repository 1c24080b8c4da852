#pragma once

#include <cstdint>
#include <vector>

#include "panfuse/common.hpp"

namespace panfuse {

enum class RasterKind { semantic, instance };

/// 2D grid of u16 label IDs with kUnknownLabel as the "no label" sentinel.
struct LabelRaster {
  int width = 0;
  int height = 0;
  RasterKind kind = RasterKind::semantic;
  std::vector<std::uint16_t> labels;  // row-major

  static LabelRaster filled(int width, int height, RasterKind kind,
                            std::uint16_t value = kUnknownLabel) {
    LabelRaster r;
    r.width = width;
    r.height = height;
    r.kind = kind;
    r.labels.assign(static_cast<std::size_t>(width) * height, value);
    return r;
  }

  std::uint16_t at(int u, int v) const {
    return labels[static_cast<std::size_t>(v) * width + u];
  }
  std::uint16_t& at(int u, int v) { return labels[static_cast<std::size_t>(v) * width + u]; }
  bool same_shape(const LabelRaster& other) const {
    return width == other.width && height == other.height;
  }
};

/// 3D points with a semantic label each, and optionally an instance label and
/// the view they were lifted from. The optional arrays are either empty or
/// the same length as points.
struct LabeledPointCloud {
  std::vector<Vec3> points;
  std::vector<std::uint16_t> sem_labels;
  std::vector<std::uint16_t> inst_labels;
  std::vector<std::int32_t> source_view;

  std::size_t size() const { return points.size(); }
  bool has_instances() const { return !inst_labels.empty(); }
};

}  // namespace panfuse
