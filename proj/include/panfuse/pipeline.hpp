#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panfuse/config.hpp"
#include "panfuse/metrics.hpp"
#include "panfuse/synthetic.hpp"

namespace panfuse {

/// Scene facts shared by every stage, persisted as manifest.json in the
/// scene directory root.
struct SceneManifest {
  std::vector<int> views;
  int width = 0;
  int height = 0;
  std::uint16_t num_classes = 21;
  std::uint16_t max_instances = 25;
  std::vector<std::uint16_t> things;
  std::vector<std::uint16_t> stuff;
};

SceneManifest read_manifest(const std::string& scene_dir);
void write_manifest(const SceneManifest& manifest, const std::string& scene_dir);

struct StageSummary {
  std::string stage;
  long items = 0;       // views, points, instances... whatever the stage counts
  double seconds = 0.0;
  std::string detail;

  std::string line() const;
};

// Stage entry points. Each reads its declared inputs from the scene
// directory, writes its outputs under derived/<stage>/ with deterministic
// names, and reports a one-line summary.
StageSummary run_gen_synthetic(const std::string& scene_dir, const PipelineConfig& cfg,
                               int threads = 1);
StageSummary run_enhance_masks(const std::string& scene_dir, const PipelineConfig& cfg,
                               int threads = 1, bool dump_q = false);
StageSummary run_build_cloud(const std::string& scene_dir, const PipelineConfig& cfg,
                             int threads = 1);
StageSummary run_project_sem(const std::string& scene_dir, const PipelineConfig& cfg,
                             int threads = 1);
StageSummary run_match_instances(const std::string& scene_dir, const PipelineConfig& cfg,
                                 int threads = 1);
StageSummary run_project_inst(const std::string& scene_dir, const PipelineConfig& cfg,
                              int threads = 1);
StageSummary run_pseudo_labels(const std::string& scene_dir, const PipelineConfig& cfg,
                               int threads = 1);

struct EvalOutcome {
  SceneEvalReport report;
  StageSummary summary;
};

/// Scores the pipeline outputs (pseudo semantic masks + projected instance
/// masks) against the stored ground truth. covered_only restricts both
/// metrics to pixels the prediction actually labels: a pixel counts when its
/// predicted semantic label is known and, for things pixels, an instance id
/// is present.
EvalOutcome run_evaluate(const std::string& scene_dir, const PipelineConfig& cfg,
                         bool covered_only, int threads = 1);

/// All stages in order (gen-synthetic excluded).
std::vector<StageSummary> run_pipeline(const std::string& scene_dir, const PipelineConfig& cfg,
                                       bool covered_only, int threads = 1,
                                       SceneEvalReport* report = nullptr);

// Deterministic stage paths, exposed for tests and tooling.
namespace scene_paths {
std::string camera(const std::string& dir, int view);
std::string depth(const std::string& dir, int view);
std::string input_sem(const std::string& dir, int view);
std::string input_inst(const std::string& dir, int view);
std::string gt_sem(const std::string& dir, int view);
std::string gt_inst(const std::string& dir, int view);
std::string enhanced_sem(const std::string& dir, int view);
std::string q_mask(const std::string& dir, int view);
std::string centers_ply(const std::string& dir);
std::string anchors_ply(const std::string& dir);
std::string anchors_json(const std::string& dir);
std::string consistent_sem(const std::string& dir, int view);
std::string global_set_ply(const std::string& dir);
std::string global_boxes_json(const std::string& dir);
std::string consistent_inst(const std::string& dir, int view);
std::string pseudo_sem(const std::string& dir, int view);
std::string eval_json(const std::string& dir);
std::string eval_txt(const std::string& dir);
}  // namespace scene_paths

}  // namespace panfuse
