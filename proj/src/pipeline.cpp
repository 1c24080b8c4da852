#include "panfuse/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "panfuse/io.hpp"
#include "panfuse/pseudo_label.hpp"

namespace panfuse {

namespace fs = std::filesystem;

namespace scene_paths {

namespace {
std::string view_file(const std::string& dir, const std::string& sub, int view,
                      const std::string& suffix) {
  return dir + "/" + sub + "/" + view_name(view) + suffix;
}
}  // namespace

std::string camera(const std::string& d, int v) { return view_file(d, "cameras", v, ".json"); }
std::string depth(const std::string& d, int v) { return view_file(d, "depth", v, ".dmap"); }
std::string input_sem(const std::string& d, int v) { return view_file(d, "sem", v, ".pgm"); }
std::string input_inst(const std::string& d, int v) { return view_file(d, "inst", v, ".pgm"); }
std::string gt_sem(const std::string& d, int v) { return view_file(d, "gt_sem", v, ".pgm"); }
std::string gt_inst(const std::string& d, int v) { return view_file(d, "gt_inst", v, ".pgm"); }
std::string enhanced_sem(const std::string& d, int v) {
  return view_file(d, "derived/enhanced", v, "_sem_enhanced.pgm");
}
std::string q_mask(const std::string& d, int v) {
  return view_file(d, "derived/enhanced", v, "_q.pgm");
}
std::string centers_ply(const std::string& d) { return d + "/derived/cloud/centers.ply"; }
std::string anchors_ply(const std::string& d) { return d + "/derived/cloud/anchors.ply"; }
std::string anchors_json(const std::string& d) { return d + "/derived/cloud/anchors.json"; }
std::string consistent_sem(const std::string& d, int v) {
  return view_file(d, "derived/proj_sem", v, "_sem_consistent.pgm");
}
std::string global_set_ply(const std::string& d) {
  return d + "/derived/instances/global_set.ply";
}
std::string global_boxes_json(const std::string& d) {
  return d + "/derived/instances/global_boxes.json";
}
std::string consistent_inst(const std::string& d, int v) {
  return view_file(d, "derived/proj_inst", v, "_inst_consistent.pgm");
}
std::string pseudo_sem(const std::string& d, int v) {
  return view_file(d, "derived/pseudo", v, "_sem_pseudo.pgm");
}
std::string eval_json(const std::string& d) { return d + "/derived/eval/report.json"; }
std::string eval_txt(const std::string& d) { return d + "/derived/eval/report.txt"; }

}  // namespace scene_paths

std::string StageSummary::line() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "[%s] items=%ld time=%.2fs%s%s", stage.c_str(), items, seconds,
                detail.empty() ? "" : " ", detail.c_str());
  return buf;
}

SceneManifest read_manifest(const std::string& scene_dir) {
  const std::string path = scene_dir + "/manifest.json";
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open scene manifest");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  SceneManifest m;
  try {
    m.views = doc.at("views").get<std::vector<int>>();
    m.width = doc.at("width").get<int>();
    m.height = doc.at("height").get<int>();
    m.num_classes = doc.at("num_classes").get<std::uint16_t>();
    m.max_instances = doc.at("max_instances").get<std::uint16_t>();
    m.things = doc.at("things").get<std::vector<std::uint16_t>>();
    m.stuff = doc.at("stuff").get<std::vector<std::uint16_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return m;
}

void write_manifest(const SceneManifest& manifest, const std::string& scene_dir) {
  nlohmann::json doc;
  doc["views"] = manifest.views;
  doc["width"] = manifest.width;
  doc["height"] = manifest.height;
  doc["num_classes"] = manifest.num_classes;
  doc["max_instances"] = manifest.max_instances;
  doc["things"] = manifest.things;
  doc["stuff"] = manifest.stuff;
  std::ofstream out(scene_dir + "/manifest.json", std::ios::trunc);
  out << doc.dump(2) << "\n";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct LoadedScene {
  SceneManifest manifest;
  std::vector<CameraView> cameras;
  std::vector<DepthMap> depths;

  std::set<std::uint16_t> things(const PipelineConfig& cfg) const {
    const auto& list = cfg.things.empty() ? manifest.things : cfg.things;
    return {list.begin(), list.end()};
  }
};

LoadedScene load_scene(const std::string& dir) {
  LoadedScene scene;
  scene.manifest = read_manifest(dir);
  for (int view : scene.manifest.views) {
    scene.cameras.push_back(read_camera_json(scene_paths::camera(dir, view)));
    scene.depths.push_back(read_depth_map(scene_paths::depth(dir, view)));
  }
  return scene;
}

std::vector<LabelRaster> load_rasters(const SceneManifest& m, RasterKind kind,
                                      const std::function<std::string(int)>& path_of) {
  std::vector<LabelRaster> out;
  const std::uint16_t bound = kind == RasterKind::semantic ? m.num_classes : m.max_instances;
  for (int view : m.views) out.push_back(read_label_raster(path_of(view), kind, bound));
  return out;
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

}  // namespace

StageSummary run_gen_synthetic(const std::string& scene_dir, const PipelineConfig& cfg,
                               int threads) {
  const auto start = Clock::now();
  SceneSpec spec =
      cfg.scene_preset == "corridor"
          ? make_corridor_scene(cfg.scene_seed, cfg.scene_views, cfg.scene_width,
                                cfg.scene_height, cfg.scene_objects)
          : make_orbit_scene(cfg.scene_seed, cfg.scene_views, cfg.scene_width, cfg.scene_height,
                             cfg.scene_objects);

  NoiseSpec noise;
  noise.seed = cfg.noise_seed;
  noise.flip_prob = cfg.noise_flip_prob;
  noise.permute_instances = cfg.noise_permute_instances;
  noise.boundary_jitter_px = cfg.noise_jitter_px;
  noise.dropout_prob = cfg.noise_dropout_prob;
  noise.num_classes = cfg.num_classes;
  noise.max_instances = cfg.max_instances;

  for (const char* sub : {"cameras", "depth", "sem", "inst", "gt_sem", "gt_inst"})
    ensure_dir(scene_dir + "/" + sub);

  SceneManifest manifest;
  manifest.width = spec.width;
  manifest.height = spec.height;
  manifest.num_classes = cfg.num_classes;
  manifest.max_instances = cfg.max_instances;
  for (std::uint16_t c : spec.things_classes()) manifest.things.push_back(c);
  manifest.stuff = {spec.wall_class, spec.floor_class};

  for (int view = 0; view < spec.view_count; ++view) {
    manifest.views.push_back(view);
    const CameraView camera = camera_for_view(spec, view);
    const RenderedView rendered = render_gt(spec, view, threads);
    const NoisyView noisy = inject_noise(rendered.sem, rendered.inst, noise, view);
    write_camera_json(camera, scene_paths::camera(scene_dir, view));
    write_depth_map(rendered.depth, scene_paths::depth(scene_dir, view));
    write_label_raster(rendered.sem, scene_paths::gt_sem(scene_dir, view));
    write_label_raster(rendered.inst, scene_paths::gt_inst(scene_dir, view));
    write_label_raster(noisy.sem, scene_paths::input_sem(scene_dir, view));
    write_label_raster(noisy.inst, scene_paths::input_inst(scene_dir, view));
  }
  write_manifest(manifest, scene_dir);

  StageSummary summary{"gen-synthetic", spec.view_count, seconds_since(start),
                       "objects=" + std::to_string(spec.primitives.size()) + " preset=" +
                           cfg.scene_preset};
  return summary;
}

StageSummary run_enhance_masks(const std::string& scene_dir, const PipelineConfig& cfg,
                               int threads, bool dump_q) {
  const auto start = Clock::now();
  LoadedScene scene = load_scene(scene_dir);
  const auto sem = load_rasters(scene.manifest, RasterKind::semantic,
                                [&](int v) { return scene_paths::input_sem(scene_dir, v); });
  ensure_dir(scene_dir + "/derived/enhanced");

  std::vector<ViewFrame> frames(scene.manifest.views.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    frames[i] = ViewFrame{&scene.cameras[i], &scene.depths[i], &sem[i]};

  long suppressed = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const int view = scene.manifest.views[i];
    LabelRaster enhanced = sem[i];
    if (cfg.window_size > 0) {
      std::vector<ViewFrame> neighbors;
      for (int id : neighbor_views(view, scene.manifest.views, cfg.window_config())) {
        const auto it = std::find(scene.manifest.views.begin(), scene.manifest.views.end(), id);
        neighbors.push_back(frames[it - scene.manifest.views.begin()]);
      }
      const ConsistencyMask q = consistency_mask(frames[i], neighbors, cfg.window_config(), threads);
      enhanced = apply_consistency(sem[i], q);
      for (std::size_t p = 0; p < q.q.size(); ++p)
        if (!q.q[p] && sem[i].labels[p] != kUnknownLabel) ++suppressed;
      if (dump_q) {
        std::vector<std::uint8_t> bytes(q.q.size());
        for (std::size_t p = 0; p < q.q.size(); ++p) bytes[p] = q.q[p] ? 255 : 0;
        write_pgm8(bytes, q.width, q.height, scene_paths::q_mask(scene_dir, view));
      }
    }
    write_label_raster(enhanced, scene_paths::enhanced_sem(scene_dir, view));
  }
  return {"enhance-masks", static_cast<long>(frames.size()), seconds_since(start),
          "suppressed_px=" + std::to_string(suppressed)};
}

StageSummary run_build_cloud(const std::string& scene_dir, const PipelineConfig& cfg,
                             int threads) {
  const auto start = Clock::now();
  LoadedScene scene = load_scene(scene_dir);
  const auto enhanced = load_rasters(scene.manifest, RasterKind::semantic,
                                     [&](int v) { return scene_paths::enhanced_sem(scene_dir, v); });
  ensure_dir(scene_dir + "/derived/cloud");

  std::vector<ViewFrame> frames(scene.manifest.views.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    frames[i] = ViewFrame{&scene.cameras[i], &scene.depths[i], &enhanced[i]};

  BuildCloudConfig bcfg;
  bcfg.window.window_size = 0;  // masks on disk are already filtered
  bcfg.kmeans = cfg.kmeans;
  bcfg.voxel_size = cfg.voxel_size;
  bcfg.stride = cfg.stride;
  const SemanticCloudResult result = build_semantic_cloud(frames, bcfg, threads);

  write_ply_cloud(result.centers, scene_paths::centers_ply(scene_dir));
  LabeledPointCloud anchor_cloud;
  anchor_cloud.points = result.anchors.anchors;
  anchor_cloud.sem_labels = result.anchors.anchor_sem;
  write_ply_cloud(anchor_cloud, scene_paths::anchors_ply(scene_dir), {"anchor"});
  nlohmann::json sidecar;
  sidecar["voxel_size"] = result.anchors.voxel_size;
  sidecar["anchor_count"] = result.anchors.anchors.size();
  std::ofstream(scene_paths::anchors_json(scene_dir), std::ios::trunc)
      << sidecar.dump(2) << "\n";

  return {"build-cloud", static_cast<long>(result.centers.size()), seconds_since(start),
          "lifted=" + std::to_string(result.lifted_points) +
              " anchors=" + std::to_string(result.anchors.anchors.size())};
}

StageSummary run_project_sem(const std::string& scene_dir, const PipelineConfig& cfg,
                             int threads) {
  const auto start = Clock::now();
  LoadedScene scene = load_scene(scene_dir);
  const LabeledPointCloud centers = read_ply_cloud(scene_paths::centers_ply(scene_dir));
  ensure_dir(scene_dir + "/derived/proj_sem");

  for (std::size_t i = 0; i < scene.manifest.views.size(); ++i) {
    const LabelRaster mask =
        project_cloud_to_mask(centers, scene.cameras[i], scene.depths[i],
                              cfg.projection_config(), LabelChannel::semantic, threads);
    write_label_raster(mask, scene_paths::consistent_sem(scene_dir, scene.manifest.views[i]));
  }
  return {"project-masks(sem)", static_cast<long>(scene.manifest.views.size()),
          seconds_since(start), "points=" + std::to_string(centers.size())};
}

StageSummary run_match_instances(const std::string& scene_dir, const PipelineConfig& cfg,
                                 int threads) {
  (void)threads;
  const auto start = Clock::now();
  LoadedScene scene = load_scene(scene_dir);
  const auto inst = load_rasters(scene.manifest, RasterKind::instance,
                                 [&](int v) { return scene_paths::input_inst(scene_dir, v); });
  const auto sem = load_rasters(scene.manifest, RasterKind::semantic,
                                [&](int v) { return scene_paths::enhanced_sem(scene_dir, v); });
  ensure_dir(scene_dir + "/derived/instances");

  const std::set<std::uint16_t> things = scene.things(cfg);
  MatchConfig mcfg = cfg.match;
  GlobalInstanceSet global(scene.manifest.max_instances);
  int dropped = 0;
  for (std::size_t i = 0; i < scene.manifest.views.size(); ++i) {
    const UpdateStats stats =
        update_global_set(global, scene.cameras[i], scene.depths[i], inst[i], sem[i], things, mcfg);
    dropped += stats.dropped;
  }

  write_ply_cloud(global.as_cloud(), scene_paths::global_set_ply(scene_dir));
  nlohmann::json boxes = nlohmann::json::array();
  for (std::size_t id = 0; id < global.size(); ++id) {
    const auto& entry = global.entry(id);
    nlohmann::json box;
    box["id"] = id;
    box["center"] = {entry.box.center.x(), entry.box.center.y(), entry.box.center.z()};
    box["yaw"] = entry.box.yaw;
    box["half_extents"] = {entry.box.half_extents.x(), entry.box.half_extents.y(),
                           entry.box.half_extents.z()};
    box["point_count"] = entry.points.size();
    boxes.push_back(box);
  }
  std::ofstream(scene_paths::global_boxes_json(scene_dir), std::ios::trunc)
      << boxes.dump(2) << "\n";

  std::string detail = "instances=" + std::to_string(global.size());
  if (dropped > 0) detail += " dropped=" + std::to_string(dropped);
  return {"match-instances", static_cast<long>(global.size()), seconds_since(start), detail};
}

StageSummary run_project_inst(const std::string& scene_dir, const PipelineConfig& cfg,
                              int threads) {
  const auto start = Clock::now();
  LoadedScene scene = load_scene(scene_dir);
  const auto consistent_sem =
      load_rasters(scene.manifest, RasterKind::semantic,
                   [&](int v) { return scene_paths::consistent_sem(scene_dir, v); });
  const LabeledPointCloud cloud = read_ply_cloud(scene_paths::global_set_ply(scene_dir));
  ensure_dir(scene_dir + "/derived/proj_inst");

  GlobalInstanceSet global(scene.manifest.max_instances);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::uint16_t id = cloud.inst_labels[i];
    while (global.size() <= id) global.entries().push_back({});
    global.entries()[id].points.push_back(cloud.points[i]);
  }

  const std::set<std::uint16_t> things = scene.things(cfg);
  for (std::size_t i = 0; i < scene.manifest.views.size(); ++i) {
    const LabelRaster mask =
        project_instances_to_masks(global, consistent_sem[i], things, scene.cameras[i],
                                   scene.depths[i], cfg.projection_config(), threads);
    write_label_raster(mask, scene_paths::consistent_inst(scene_dir, scene.manifest.views[i]));
  }
  return {"project-masks(inst)", static_cast<long>(scene.manifest.views.size()),
          seconds_since(start), "instances=" + std::to_string(global.size())};
}

StageSummary run_pseudo_labels(const std::string& scene_dir, const PipelineConfig& cfg,
                               int threads) {
  (void)threads;
  const auto start = Clock::now();
  const SceneManifest manifest = read_manifest(scene_dir);
  const auto m2f = load_rasters(manifest, RasterKind::semantic,
                                [&](int v) { return scene_paths::input_sem(scene_dir, v); });
  const auto reference = load_rasters(manifest, RasterKind::semantic,
                                      [&](int v) { return scene_paths::consistent_sem(scene_dir, v); });
  ensure_dir(scene_dir + "/derived/pseudo");

  for (std::size_t i = 0; i < manifest.views.size(); ++i) {
    const LabelRaster pseudo =
        fuse_pseudo_label(m2f[i], reference[i], cfg.connectivity, cfg.min_region_px);
    write_label_raster(pseudo, scene_paths::pseudo_sem(scene_dir, manifest.views[i]));
  }
  return {"pseudo-labels", static_cast<long>(manifest.views.size()), seconds_since(start), ""};
}

EvalOutcome run_evaluate(const std::string& scene_dir, const PipelineConfig& cfg,
                         bool covered_only, int threads) {
  (void)threads;
  const auto start = Clock::now();
  const SceneManifest manifest = read_manifest(scene_dir);
  const auto pred_sem = load_rasters(manifest, RasterKind::semantic,
                                     [&](int v) { return scene_paths::pseudo_sem(scene_dir, v); });
  const auto pred_inst =
      load_rasters(manifest, RasterKind::instance,
                   [&](int v) { return scene_paths::consistent_inst(scene_dir, v); });
  auto gt_sem = load_rasters(manifest, RasterKind::semantic,
                             [&](int v) { return scene_paths::gt_sem(scene_dir, v); });
  auto gt_inst = load_rasters(manifest, RasterKind::instance,
                              [&](int v) { return scene_paths::gt_inst(scene_dir, v); });

  const std::set<std::uint16_t> things = [&] {
    const auto& list = cfg.things.empty() ? manifest.things : cfg.things;
    return std::set<std::uint16_t>(list.begin(), list.end());
  }();

  EvalOutcome outcome;
  if (covered_only) {
    // Semantic coverage: the prediction names a class. Joint coverage: the
    // instance channel also has an id wherever that class is a things class.
    auto gt_sem_cov = gt_sem;
    auto gt_sem_joint = gt_sem;
    for (std::size_t i = 0; i < gt_sem.size(); ++i) {
      for (std::size_t p = 0; p < gt_sem[i].labels.size(); ++p) {
        const std::uint16_t ps = pred_sem[i].labels[p];
        const bool sem_covered = ps != kUnknownLabel;
        const bool joint_covered =
            sem_covered && (!things.count(ps) || pred_inst[i].labels[p] != kUnknownLabel);
        if (!sem_covered) gt_sem_cov[i].labels[p] = kUnknownLabel;
        if (!joint_covered) gt_sem_joint[i].labels[p] = kUnknownLabel;
      }
    }
    outcome.report = pq_scene(pred_sem, pred_inst, gt_sem_joint, gt_inst, things);
    std::tie(outcome.report.miou, outcome.report.per_class_iou) = scene_miou(pred_sem, gt_sem_cov);
  } else {
    outcome.report = evaluate_scene(pred_sem, pred_inst, gt_sem, gt_inst, things);
  }

  ensure_dir(scene_dir + "/derived/eval");
  nlohmann::json doc;
  doc["miou"] = outcome.report.miou;
  auto& per_class = doc["per_class_iou"] = nlohmann::json::object();
  for (const auto& [cls, iou] : outcome.report.per_class_iou)
    per_class[std::to_string(cls)] = iou;
  doc["pq_scene"] = outcome.report.pq_scene;
  doc["sq"] = outcome.report.sq;
  doc["rq"] = outcome.report.rq;
  doc["tp"] = outcome.report.tp;
  doc["fp"] = outcome.report.fp;
  doc["fn"] = outcome.report.fn;
  doc["covered_only"] = covered_only;
  std::ofstream(scene_paths::eval_json(scene_dir), std::ios::trunc) << doc.dump(2) << "\n";

  char buf[512];
  std::string table;
  std::snprintf(buf, sizeof(buf),
                "metric      value\nmiou        %.6f\npq_scene    %.6f\nsq          %.6f\n"
                "rq          %.6f\ntp/fp/fn    %ld/%ld/%ld\n",
                outcome.report.miou, outcome.report.pq_scene, outcome.report.sq,
                outcome.report.rq, outcome.report.tp, outcome.report.fp, outcome.report.fn);
  table = buf;
  table += "per-class iou:\n";
  for (const auto& [cls, iou] : outcome.report.per_class_iou) {
    std::snprintf(buf, sizeof(buf), "  class %-5u %.6f\n", static_cast<unsigned>(cls), iou);
    table += buf;
  }
  std::ofstream(scene_paths::eval_txt(scene_dir), std::ios::trunc) << table;

  std::snprintf(buf, sizeof(buf), "miou=%.4f pq_scene=%.4f", outcome.report.miou,
                outcome.report.pq_scene);
  outcome.summary =
      StageSummary{"evaluate", static_cast<long>(manifest.views.size()), seconds_since(start), buf};
  return outcome;
}

std::vector<StageSummary> run_pipeline(const std::string& scene_dir, const PipelineConfig& cfg,
                                       bool covered_only, int threads, SceneEvalReport* report) {
  std::vector<StageSummary> summaries;
  summaries.push_back(run_enhance_masks(scene_dir, cfg, threads));
  summaries.push_back(run_build_cloud(scene_dir, cfg, threads));
  summaries.push_back(run_project_sem(scene_dir, cfg, threads));
  summaries.push_back(run_match_instances(scene_dir, cfg, threads));
  summaries.push_back(run_project_inst(scene_dir, cfg, threads));
  summaries.push_back(run_pseudo_labels(scene_dir, cfg, threads));
  EvalOutcome outcome = run_evaluate(scene_dir, cfg, covered_only, threads);
  summaries.push_back(outcome.summary);
  if (report) *report = outcome.report;
  return summaries;
}

}  // namespace panfuse
