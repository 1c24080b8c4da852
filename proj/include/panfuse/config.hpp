#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "panfuse/instance_match.hpp"
#include "panfuse/losses.hpp"
#include "panfuse/semantic_cloud.hpp"
#include "panfuse/view_projection.hpp"

namespace panfuse {

/// Thrown for unreadable or malformed config files; the message names the
/// file, line, and offending key.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Every tunable of the pipeline, with the defaults the stages assume when a
/// key is absent. Loaded from a flat TOML-style key/value file; `[section]`
/// headers and dotted keys are equivalent spellings.
struct PipelineConfig {
  // consistency filtering
  int window_size = 4;
  double occlusion_tol = 0.05;

  // semantic cloud
  int stride = 4;
  double voxel_size = 0.05;
  KMeansConfig kmeans;

  // instance matching
  MatchConfig match;

  // mask projection
  int splat_radius = 1;
  double depth_gate = 0.0;  // 0 derives 2 * voxel_size

  // pseudo labels
  int connectivity = 4;
  int min_region_px = 32;

  // label spaces
  std::uint16_t num_classes = 21;
  std::uint16_t max_instances = 25;
  std::vector<std::uint16_t> things;  // empty defers to the scene manifest

  LossConfig loss;

  // scene generation (gen-synthetic)
  std::string scene_preset = "orbit";
  std::uint64_t scene_seed = 1;
  int scene_views = 20;
  int scene_width = 640;
  int scene_height = 480;
  int scene_objects = 5;

  // noise injection (gen-synthetic)
  std::uint64_t noise_seed = 7;
  double noise_flip_prob = 0.0;
  bool noise_permute_instances = false;
  int noise_jitter_px = 0;
  double noise_dropout_prob = 0.0;

  double effective_depth_gate() const {
    return depth_gate > 0.0 ? depth_gate : 2.0 * voxel_size;
  }
  WindowConfig window_config() const { return {window_size, occlusion_tol}; }
  ProjectionConfig projection_config() const { return {splat_radius, effective_depth_gate()}; }
};

PipelineConfig load_config(const std::string& path);

/// Applies defaults only; no file access.
PipelineConfig default_config();

}  // namespace panfuse
