// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "nnfs/embedding_store.hpp"
#include "nnfs/feature_matrix.hpp"

/// Nearest-neighbor few-shot inference.
///
/// Pipeline, in order:
///   1. center every support/query row on the source mean and L2-normalize
///      it (or L2-normalize only, when centering is off);
///   2. shift the query set so its mean matches the support mean;
///   3. build one prototype per class from the support rows;
///   4. pseudo-label the queries by nearest prototype under 1 - cos;
///   5. rectify the prototypes from the softmax-weighted pool of support
///      rows and pseudo-labeled queries;
///   6. return softmax(-distance) over the final prototypes.
///
/// Every step is a pure function and is exposed separately for testing.
namespace nnfs {

/// Ablation switches. Distance is always cosine distance 1 - cos(u, v).
struct NnfsConfig {
  bool use_norm = true;
  bool use_shift = true;
  bool use_proto_rect = true;

  static constexpr NnfsConfig nn() { return {false, false, false}; }
  static constexpr NnfsConfig nn_proto() { return {false, false, true}; }
  static constexpr NnfsConfig nn_norm() { return {true, true, false}; }
  static constexpr NnfsConfig nn_norm_proto() { return {true, true, true}; }

  friend bool operator==(const NnfsConfig&, const NnfsConfig&) = default;
};

struct Prototypes {
  FeatureMatrix means;  // num_classes x dim
  bool rectified = false;

  std::size_t num_classes() const noexcept { return means.rows(); }
  std::size_t dim() const noexcept { return means.dim(); }
};

struct PredictionResult {
  FeatureMatrix distances;     // queries x C; empty for logit-based methods
  FeatureMatrix distribution;  // queries x C, rows sum to 1
  LabelVector hard_labels;

  std::size_t num_queries() const noexcept { return distribution.rows(); }
  std::size_t num_classes() const noexcept { return distribution.dim(); }
};

/// (x - mean) / ||x - mean||_2 per row. Throws kNumeric naming the row when
/// centering leaves a zero vector.
FeatureMatrix center_and_normalize(const FeatureMatrix& x,
                                   const MeanVector& mean);

FeatureMatrix l2_normalize(const FeatureMatrix& x);

/// Adds eta = mean(support) - mean(query) to every query row.
FeatureMatrix transductive_shift(const FeatureMatrix& support,
                                 const FeatureMatrix& query);

/// Per-class arithmetic mean of the support rows.
Prototypes class_prototypes(const FeatureMatrix& support,
                            const LabelVector& labels,
                            std::size_t num_classes);

/// argmin_c (1 - cos(q, prototype_c)); exact ties go to the lowest class.
LabelVector nearest_centroid_assign(const FeatureMatrix& query,
                                    const Prototypes& prototypes);

/// Re-estimates each prototype from support rows labeled c and query rows
/// pseudo-labeled c. Each pooled row x contributes w_c(x) * x, where w(x)
/// is the softmax of cos(x, initial prototype) over all classes, and the
/// sum is divided by the pooled row count (not by the weight mass).
Prototypes proto_rect(const FeatureMatrix& support,
                      const LabelVector& support_labels,
                      const FeatureMatrix& query,
                      const LabelVector& pseudo_labels,
                      const Prototypes& initial);

/// Cosine distances to every prototype and softmax(-distance) per query.
PredictionResult soft_predictions(const FeatureMatrix& query,
                                  const Prototypes& prototypes);

/// Softmax of arbitrary per-row scores plus lowest-index argmax labels.
/// Shared by the logit-based baselines.
PredictionResult predictions_from_logits(FeatureMatrix logits);

/// Runs the full pipeline. `mean` is required when `config.use_norm` is set.
/// `num_classes` is the episode's class count; every class must have at
/// least one support row.
PredictionResult nnfs_infer(const FeatureMatrix& support,
                            const LabelVector& support_labels,
                            const FeatureMatrix& query,
                            std::size_t num_classes,
                            const MeanVector* mean, const NnfsConfig& config);

}  // namespace nnfs
