#include "panfuse/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace panfuse {

namespace {

/// log softmax of one row, written into out (max-shifted for stability).
void log_softmax(const double* row, int n, std::vector<double>& out) {
  out.resize(n);
  double mx = row[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, row[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(row[i] - mx);
  const double log_z = mx + std::log(sum);
  for (int i = 0; i < n; ++i) out[i] = row[i] - log_z;
}

}  // namespace

LossValue cluster_loss(std::span<const std::uint16_t> anchor_labels, const LogitsBundle& logits,
                       int gaussians_per_anchor) {
  const std::size_t n_anchors = anchor_labels.size();
  const std::size_t rows = n_anchors * static_cast<std::size_t>(gaussians_per_anchor);
  if (gaussians_per_anchor < 1 || static_cast<std::size_t>(logits.rows) != rows)
    throw std::invalid_argument("cluster_loss: logits rows must be anchors * k");

  LossValue loss;
  loss.grad.assign(logits.logits.size(), 0.0);
  if (rows == 0) return loss;
  const int c = logits.num_classes;
  const double scale = 1.0 / static_cast<double>(rows);
  std::vector<double> lsm;
  for (std::size_t a = 0; a < n_anchors; ++a) {
    const std::uint16_t label = anchor_labels[a];
    if (label >= c) throw std::invalid_argument("cluster_loss: label out of range");
    for (int g = 0; g < gaussians_per_anchor; ++g) {
      const std::size_t r = a * gaussians_per_anchor + g;
      log_softmax(logits.row(static_cast<int>(r)), c, lsm);
      loss.value -= scale * lsm[label];
      double* grad_row = loss.grad.data() + r * c;
      for (int j = 0; j < c; ++j) grad_row[j] = scale * std::exp(lsm[j]);
      grad_row[label] -= scale;
    }
  }
  return loss;
}

LossValue semantic_loss(const LabelRaster& target, const LogitsBundle& logits) {
  const std::size_t pixels = target.labels.size();
  if (static_cast<std::size_t>(logits.rows) != pixels)
    throw std::invalid_argument("semantic_loss: logits rows must match pixel count");

  std::size_t known = 0;
  for (std::uint16_t label : target.labels)
    if (label != kUnknownLabel) ++known;

  LossValue loss;
  loss.grad.assign(logits.logits.size(), 0.0);
  if (known == 0) return loss;

  const int c = logits.num_classes;
  const double scale = 1.0 / static_cast<double>(known);
  std::vector<double> lsm;
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::uint16_t label = target.labels[i];
    if (label == kUnknownLabel) continue;
    if (label >= c) throw std::invalid_argument("semantic_loss: label out of range");
    log_softmax(logits.row(static_cast<int>(i)), c, lsm);
    loss.value -= scale * lsm[label];
    double* grad_row = loss.grad.data() + i * c;
    for (int j = 0; j < c; ++j) grad_row[j] = scale * std::exp(lsm[j]);
    grad_row[label] -= scale;
  }
  return loss;
}

LossValue instance_loss(const LabelRaster& m2f_matched, const LabelRaster& match_consistent,
                        const LogitsBundle& logits, LossConfig::WeightMode mode) {
  if (!m2f_matched.same_shape(match_consistent))
    throw std::invalid_argument("instance_loss: dimension mismatch");
  const std::size_t pixels = m2f_matched.labels.size();
  if (static_cast<std::size_t>(logits.rows) != pixels)
    throw std::invalid_argument("instance_loss: logits rows must match pixel count");

  LossValue loss;
  loss.grad.assign(logits.logits.size(), 0.0);
  if (pixels == 0) return loss;

  const int c = logits.num_classes;
  const double scale = 1.0 / static_cast<double>(pixels);
  std::vector<double> lsm;
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::uint16_t a = m2f_matched.labels[i];
    const std::uint16_t b = match_consistent.labels[i];
    const int sources = (a != kUnknownLabel) + (b != kUnknownLabel);
    if (sources == 0) continue;
    if ((a != kUnknownLabel && a >= c) || (b != kUnknownLabel && b >= c))
      throw std::invalid_argument("instance_loss: label out of range");
    const double per_source =
        mode == LossConfig::WeightMode::mean ? 1.0 / static_cast<double>(sources) : 1.0;
    const double total_weight = per_source * sources;

    log_softmax(logits.row(static_cast<int>(i)), c, lsm);
    double* grad_row = loss.grad.data() + i * c;
    for (int j = 0; j < c; ++j) grad_row[j] = scale * total_weight * std::exp(lsm[j]);
    if (a != kUnknownLabel) {
      loss.value -= scale * per_source * lsm[a];
      grad_row[a] -= scale * per_source;
    }
    if (b != kUnknownLabel) {
      loss.value -= scale * per_source * lsm[b];
      grad_row[b] -= scale * per_source;
    }
  }
  return loss;
}

}  // namespace panfuse
