// SPDX-License-Identifier: Apache-2.0
#include "nnfs/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "nnfs/error.hpp"

namespace nnfs {
namespace {

void logits_into(const LinearHead& head, std::span<const double> x,
                 std::span<double> out) {
  for (std::size_t c = 0; c < head.num_classes(); ++c) {
    out[c] = linalg::dot(head.weights.row(c), x) + head.bias[c];
  }
}

}  // namespace

PredictionResult zero_shot_predict(const EmbeddingDataset& dataset,
                                   std::span<const std::size_t> query_indices) {
  if (!dataset.has_logits()) {
    fail(ErrorKind::kUsage, "zero-shot requires stored logits but " +
                                dataset.task + "/" + dataset.language + "/" +
                                std::string(to_string(dataset.split)) +
                                " has has_logits=false");
  }
  FeatureMatrix logits(query_indices.size(), dataset.num_classes);
  for (std::size_t i = 0; i < query_indices.size(); ++i) {
    if (query_indices[i] >= dataset.num_samples()) {
      fail(ErrorKind::kUsage, "zero-shot: query index out of range");
    }
    const auto src = dataset.logit_row(query_indices[i]);
    auto dst = logits.row(i);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c];
  }
  return predictions_from_logits(std::move(logits));
}

LinearHead LinearHead::zeros(std::size_t num_classes, std::size_t dim) {
  return LinearHead{FeatureMatrix(num_classes, dim),
                    std::vector<double>(num_classes, 0.0),
                    {}};
}

HeadGradient head_loss_and_gradient(const LinearHead& head,
                                    const FeatureMatrix& x,
                                    const LabelVector& labels) {
  const std::size_t num_classes = head.num_classes();
  if (x.dim() != head.dim()) {
    fail(ErrorKind::kUsage, "head: feature dim mismatch");
  }
  HeadGradient grad{0.0, FeatureMatrix(num_classes, head.dim()),
                    std::vector<double>(num_classes, 0.0)};
  std::vector<double> z(num_classes);
  std::vector<double> p(num_classes);
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    logits_into(head, row, z);
    linalg::softmax(z, p);
    // log-sum-exp form keeps the loss finite when p[y] underflows
    double hi = z[0];
    for (double v : z) hi = std::max(hi, v);
    double total = 0.0;
    for (double v : z) total += std::exp(v - hi);
    grad.loss += (hi + std::log(total) - z[labels[i]]) * inv_n;

    for (std::size_t c = 0; c < num_classes; ++c) {
      const double delta = (p[c] - (labels[i] == c ? 1.0 : 0.0)) * inv_n;
      auto gw = grad.weights.row(c);
      for (std::size_t j = 0; j < row.size(); ++j) gw[j] += delta * row[j];
      grad.bias[c] += delta;
    }
  }
  return grad;
}

LinearHead train_head(const FeatureMatrix& support, const LabelVector& labels,
                      std::size_t num_classes,
                      const HeadTrainingOptions& options) {
  if (options.epochs == 0) fail(ErrorKind::kUsage, "train_head: epochs == 0");
  if (!(options.learning_rate >= 0.0) || !std::isfinite(options.learning_rate)) {
    fail(ErrorKind::kUsage, "train_head: learning rate must be >= 0");
  }
  if (labels.size() != support.rows() || support.empty()) {
    fail(ErrorKind::kUsage, "train_head: labels/support size mismatch");
  }
  std::vector<std::size_t> counts(num_classes, 0);
  for (Label l : labels) {
    if (l >= num_classes) fail(ErrorKind::kUsage, "train_head: label range");
    ++counts[l];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      fail(ErrorKind::kInsufficient,
           "train_head: class " + std::to_string(c) + " has no support samples");
    }
  }

  auto head = LinearHead::zeros(num_classes, support.dim());
  head.training_log.reserve(options.epochs);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto grad = head_loss_and_gradient(head, support, labels);
    if (!std::isfinite(grad.loss)) {
      fail(ErrorKind::kNumeric, "train_head: non-finite loss at epoch " +
                                    std::to_string(epoch) +
                                    " (learning rate too large?)");
    }
    head.training_log.push_back({epoch, grad.loss});
    auto w = head.weights.data();
    const auto gw = grad.weights.data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] -= options.learning_rate * gw[k];
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      head.bias[c] -= options.learning_rate * grad.bias[c];
    }
  }
  return head;
}

PredictionResult head_predict(const LinearHead& head,
                              const FeatureMatrix& query) {
  if (query.dim() != head.dim()) {
    fail(ErrorKind::kUsage, "head_predict: query dim " +
                                std::to_string(query.dim()) + " != head dim " +
                                std::to_string(head.dim()));
  }
  FeatureMatrix logits(query.rows(), head.num_classes());
  for (std::size_t i = 0; i < query.rows(); ++i) {
    logits_into(head, query.row(i), logits.row(i));
  }
  return predictions_from_logits(std::move(logits));
}

}  // namespace nnfs
