// Command-line front end: each pipeline stage as a subcommand over an
// on-disk scene directory, plus `pipeline` to chain them all.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "panfuse/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string scene_dir;
  std::string config_path;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scene-dir", args.scene_dir, "Scene directory")->required();
  cmd->add_option("--config", args.config_path, "Config file (TOML-style key = value)");
  cmd->add_option("--threads", args.threads, "Worker thread cap (results are identical for any value)")
      ->check(CLI::PositiveNumber);
}

panfuse::PipelineConfig resolve_config(const CommonArgs& args) {
  if (args.config_path.empty()) return panfuse::default_config();
  return panfuse::load_config(args.config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view panoptic label fusion over depth-endowed scenes"};
  app.require_subcommand(1);

  CommonArgs args;
  bool dump_q = false;
  bool covered_only = false;
  double min_miou = -1.0, min_pq = -1.0;

  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic scene directory");
  add_common(gen, args);

  auto* enhance = app.add_subcommand("enhance-masks", "Filter semantic masks against neighbors");
  add_common(enhance, args);
  enhance->add_flag("--dump-q", dump_q, "Also write the agreement masks as 8-bit PGM");

  auto* build = app.add_subcommand("build-cloud", "Lift, cluster and vote the semantic cloud");
  add_common(build, args);

  std::string channel = "sem";
  auto* project = app.add_subcommand("project-masks", "Project labeled 3D points into views");
  add_common(project, args);
  project->add_option("--channel", channel, "sem: semantic cloud, inst: matched instances")
      ->check(CLI::IsMember({"sem", "inst"}));

  auto* match = app.add_subcommand("match-instances", "Match instance segments across views in 3D");
  add_common(match, args);

  auto* pseudo = app.add_subcommand("pseudo-labels", "Fuse machine masks with projected masks");
  add_common(pseudo, args);

  auto* evaluate = app.add_subcommand("evaluate", "Score outputs against the ground truth");
  add_common(evaluate, args);
  evaluate->add_flag("--covered-only", covered_only,
                     "Restrict the metrics to pixels the prediction labels");
  evaluate->add_option("--min-miou", min_miou, "Fail (exit 1) when mIoU falls below this");
  evaluate->add_option("--min-pq", min_pq, "Fail (exit 1) when PQ falls below this");

  auto* pipeline = app.add_subcommand("pipeline", "All stages in order");
  add_common(pipeline, args);
  pipeline->add_flag("--covered-only", covered_only,
                     "Restrict the metrics to pixels the prediction labels");
  pipeline->add_option("--min-miou", min_miou, "Fail (exit 1) when mIoU falls below this");
  pipeline->add_option("--min-pq", min_pq, "Fail (exit 1) when PQ falls below this");

  CLI11_PARSE(app, argc, argv);

  try {
    const panfuse::PipelineConfig cfg = resolve_config(args);
    auto gate = [&](const panfuse::SceneEvalReport& report) {
      if (min_miou >= 0.0 && report.miou < min_miou) {
        std::fprintf(stderr, "evaluate: miou %.4f below gate %.4f\n", report.miou, min_miou);
        return 1;
      }
      if (min_pq >= 0.0 && report.pq_scene < min_pq) {
        std::fprintf(stderr, "evaluate: pq_scene %.4f below gate %.4f\n", report.pq_scene,
                     min_pq);
        return 1;
      }
      return 0;
    };

    if (gen->parsed()) {
      std::cout << panfuse::run_gen_synthetic(args.scene_dir, cfg, args.threads).line() << "\n";
    } else if (enhance->parsed()) {
      std::cout << panfuse::run_enhance_masks(args.scene_dir, cfg, args.threads, dump_q).line()
                << "\n";
    } else if (build->parsed()) {
      std::cout << panfuse::run_build_cloud(args.scene_dir, cfg, args.threads).line() << "\n";
    } else if (project->parsed()) {
      if (channel == "sem")
        std::cout << panfuse::run_project_sem(args.scene_dir, cfg, args.threads).line() << "\n";
      else
        std::cout << panfuse::run_project_inst(args.scene_dir, cfg, args.threads).line() << "\n";
    } else if (match->parsed()) {
      std::cout << panfuse::run_match_instances(args.scene_dir, cfg, args.threads).line() << "\n";
    } else if (pseudo->parsed()) {
      std::cout << panfuse::run_pseudo_labels(args.scene_dir, cfg, args.threads).line() << "\n";
    } else if (evaluate->parsed()) {
      const panfuse::EvalOutcome outcome =
          panfuse::run_evaluate(args.scene_dir, cfg, covered_only, args.threads);
      std::cout << outcome.summary.line() << "\n";
      return gate(outcome.report);
    } else if (pipeline->parsed()) {
      panfuse::SceneEvalReport report;
      for (const auto& summary :
           panfuse::run_pipeline(args.scene_dir, cfg, covered_only, args.threads, &report))
        std::cout << summary.line() << "\n";
      return gate(report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
