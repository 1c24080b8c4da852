#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "panfuse/raster.hpp"

namespace panfuse {

/// Row-major logits, one row per pixel/Gaussian, one column per class or
/// instance slot.
struct LogitsBundle {
  int rows = 0;
  int num_classes = 0;
  std::vector<double> logits;

  static LogitsBundle zeros(int rows, int num_classes) {
    LogitsBundle b;
    b.rows = rows;
    b.num_classes = num_classes;
    b.logits.assign(static_cast<std::size_t>(rows) * num_classes, 0.0);
    return b;
  }
  double* row(int r) { return logits.data() + static_cast<std::size_t>(r) * num_classes; }
  const double* row(int r) const {
    return logits.data() + static_cast<std::size_t>(r) * num_classes;
  }
};

struct LossConfig {
  double lambda_sem = 0.2;
  double lambda_ins = 0.2;
  // The target where both instance sources know a pixel: literal sum keeps
  // weight 2 on an agreed class, mean normalizes the weights to 1.
  enum class WeightMode { sum, mean } instance_weight_mode = WeightMode::sum;
};

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // same layout as the logits
};

/// Cross-entropy of every Gaussian's logits against its anchor's voted
/// label, averaged over all anchor-Gaussian pairs. Logits hold
/// anchor_labels.size() * gaussians_per_anchor rows, grouped by anchor.
LossValue cluster_loss(std::span<const std::uint16_t> anchor_labels, const LogitsBundle& logits,
                       int gaussians_per_anchor);

/// Mean cross-entropy over the target's known pixels; zero (with zero
/// gradient) when nothing is known.
LossValue semantic_loss(const LabelRaster& target, const LogitsBundle& logits);

/// Instance cross-entropy against the sum of the two masks' one-hot targets,
/// averaged over all pixels. A pixel unknown in one source contributes only
/// the other's one-hot; unknown in both contributes nothing.
LossValue instance_loss(const LabelRaster& m2f_matched, const LabelRaster& match_consistent,
                        const LogitsBundle& logits,
                        LossConfig::WeightMode mode = LossConfig::WeightMode::sum);

}  // namespace panfuse
