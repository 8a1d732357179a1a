// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nnfs/embedding_store.hpp"
#include "nnfs/feature_matrix.hpp"
#include "nnfs/nnfs.hpp"

namespace nnfs {

/// Softmax over the dataset's stored classifier logits for the given rows.
/// The support set plays no part. Throws kUsage when the dataset has no
/// logits.
PredictionResult zero_shot_predict(const EmbeddingDataset& dataset,
                                   std::span<const std::size_t> query_indices);

struct EpochLoss {
  std::size_t epoch = 0;
  double loss = 0.0;
};

/// Multinomial logistic-regression head on frozen features.
struct LinearHead {
  FeatureMatrix weights;  // C x dim
  std::vector<double> bias;
  std::vector<EpochLoss> training_log;

  std::size_t num_classes() const noexcept { return weights.rows(); }
  std::size_t dim() const noexcept { return weights.dim(); }

  static LinearHead zeros(std::size_t num_classes, std::size_t dim);
};

struct HeadGradient {
  double loss = 0.0;
  FeatureMatrix weights;
  std::vector<double> bias;
};

/// Mean softmax cross-entropy of `head` on (x, labels) and its gradient.
HeadGradient head_loss_and_gradient(const LinearHead& head,
                                    const FeatureMatrix& x,
                                    const LabelVector& labels);

struct HeadTrainingOptions {
  std::size_t epochs = 300;
  double learning_rate = 0.1;
};

/// Full-batch gradient descent from zero-initialized parameters. The log
/// holds the loss evaluated at the start of each epoch.
LinearHead train_head(const FeatureMatrix& support, const LabelVector& labels,
                      std::size_t num_classes,
                      const HeadTrainingOptions& options = {});

PredictionResult head_predict(const LinearHead& head, const FeatureMatrix& query);

}  // namespace nnfs
