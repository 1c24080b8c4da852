#include "panfuse/metrics.hpp"

#include <stdexcept>

namespace panfuse {

namespace {

void check_views(std::span<const LabelRaster> a, std::span<const LabelRaster> b,
                 const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": view count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!a[i].same_shape(b[i]))
      throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

std::pair<double, std::map<std::uint16_t, double>> scene_miou(
    std::span<const LabelRaster> pred, std::span<const LabelRaster> gt) {
  check_views(pred, gt, "scene_miou");

  std::map<std::uint16_t, long> inter, pred_count, gt_count;
  for (std::size_t view = 0; view < gt.size(); ++view) {
    for (std::size_t i = 0; i < gt[view].labels.size(); ++i) {
      const std::uint16_t g = gt[view].labels[i];
      if (g == kUnknownLabel) continue;
      const std::uint16_t p = pred[view].labels[i];
      gt_count[g] += 1;
      if (p != kUnknownLabel) pred_count[p] += 1;
      if (p == g) inter[g] += 1;
    }
  }

  std::map<std::uint16_t, double> per_class;
  double sum = 0.0;
  for (const auto& [cls, gc] : gt_count) {
    const long is = inter.count(cls) ? inter[cls] : 0;
    const long ps = pred_count.count(cls) ? pred_count[cls] : 0;
    const long uni = ps + gc - is;
    const double iou = uni > 0 ? static_cast<double>(is) / static_cast<double>(uni) : 0.0;
    per_class[cls] = iou;
    sum += iou;
  }
  const double miou = gt_count.empty() ? 0.0 : sum / static_cast<double>(gt_count.size());
  return {miou, per_class};
}

SceneEvalReport pq_scene(std::span<const LabelRaster> pred_sem,
                         std::span<const LabelRaster> pred_inst,
                         std::span<const LabelRaster> gt_sem,
                         std::span<const LabelRaster> gt_inst,
                         const std::set<std::uint16_t>& things) {
  check_views(pred_sem, gt_sem, "pq_scene");
  check_views(pred_inst, gt_inst, "pq_scene");
  check_views(pred_sem, pred_inst, "pq_scene");

  // Segment key: (class, instance) for things, (class, 0) for stuff.
  using Key = std::pair<std::uint16_t, std::uint16_t>;
  std::map<Key, long> pred_size, gt_size;
  std::map<std::pair<Key, Key>, long> overlap;

  for (std::size_t view = 0; view < gt_sem.size(); ++view) {
    for (std::size_t i = 0; i < gt_sem[view].labels.size(); ++i) {
      const std::uint16_t gs = gt_sem[view].labels[i];
      if (gs == kUnknownLabel) continue;

      bool have_gt = true;
      Key gkey{gs, 0};
      if (things.count(gs)) {
        const std::uint16_t gi = gt_inst[view].labels[i];
        if (gi == kUnknownLabel) have_gt = false;  // things pixel with no gt segment
        gkey.second = gi;
      }
      if (have_gt) gt_size[gkey] += 1;

      const std::uint16_t ps = pred_sem[view].labels[i];
      bool have_pred = ps != kUnknownLabel;
      Key pkey{ps, 0};
      if (have_pred && things.count(ps)) {
        const std::uint16_t pi = pred_inst[view].labels[i];
        if (pi == kUnknownLabel) have_pred = false;
        pkey.second = pi;
      }
      if (have_pred) pred_size[pkey] += 1;

      if (have_gt && have_pred) overlap[{pkey, gkey}] += 1;
    }
  }

  SceneEvalReport report;
  double sum_iou = 0.0;
  std::set<Key> matched_pred, matched_gt;
  for (const auto& [pair, inter] : overlap) {
    const auto& [pkey, gkey] = pair;
    if (pkey.first != gkey.first) continue;  // same class only
    const double uni = static_cast<double>(pred_size[pkey] + gt_size[gkey] - inter);
    const double iou = static_cast<double>(inter) / uni;
    if (iou > 0.5) {
      report.tp += 1;
      sum_iou += iou;
      matched_pred.insert(pkey);
      matched_gt.insert(gkey);
    }
  }
  report.fp = static_cast<long>(pred_size.size() - matched_pred.size());
  report.fn = static_cast<long>(gt_size.size() - matched_gt.size());

  const double denom = static_cast<double>(report.tp) + 0.5 * static_cast<double>(report.fp) +
                       0.5 * static_cast<double>(report.fn);
  if (denom > 0.0) {
    report.pq_scene = sum_iou / denom;
    report.rq = static_cast<double>(report.tp) / denom;
  }
  if (report.tp > 0) report.sq = sum_iou / static_cast<double>(report.tp);
  return report;
}

SceneEvalReport evaluate_scene(std::span<const LabelRaster> pred_sem,
                               std::span<const LabelRaster> pred_inst,
                               std::span<const LabelRaster> gt_sem,
                               std::span<const LabelRaster> gt_inst,
                               const std::set<std::uint16_t>& things) {
  SceneEvalReport report = pq_scene(pred_sem, pred_inst, gt_sem, gt_inst, things);
  std::tie(report.miou, report.per_class_iou) = scene_miou(pred_sem, gt_sem);
  return report;
}

}  // namespace panfuse
