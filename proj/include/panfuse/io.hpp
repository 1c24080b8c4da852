#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "panfuse/geometry.hpp"
#include "panfuse/raster.hpp"

namespace panfuse {

/// Thrown for any malformed on-disk artifact. The message names the file and,
/// where it applies, the byte offset of the defect.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Label rasters: 16-bit binary PGM (P5, maxval 65535, big-endian samples).
// Readers reject any label >= label_bound other than the unknown sentinel.
LabelRaster read_label_raster(const std::string& path, RasterKind kind,
                              std::uint16_t label_bound);
void write_label_raster(const LabelRaster& raster, const std::string& path);

// 8-bit PGM, used only for dumping binary masks for inspection.
void write_pgm8(const std::vector<std::uint8_t>& values, int width, int height,
                const std::string& path);

// Depth maps: "DMAP" magic, u32le width, u32le height, then width*height
// float32le values row-major. NaN encodes invalid; finite values must be > 0.
DepthMap read_depth_map(const std::string& path);
void write_depth_map(const DepthMap& depth, const std::string& path);

// Labeled point clouds: ASCII PLY with float x,y,z, ushort sem and an
// optional ushort inst, written with 9 significant digits.
LabeledPointCloud read_ply_cloud(const std::string& path,
                                 std::vector<std::string>* comments = nullptr);
void write_ply_cloud(const LabeledPointCloud& cloud, const std::string& path,
                     const std::vector<std::string>& comments = {});

// Cameras: one JSON document per view (view_id, width, height, k_matrix as 9
// row-major numbers, cam_to_world as 16 row-major numbers).
CameraView read_camera_json(const std::string& path);
void write_camera_json(const CameraView& view, const std::string& path);

}  // namespace panfuse
