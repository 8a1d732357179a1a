// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnfs/feature_matrix.hpp"

namespace nnfs {

enum class Split { kTrain, kDev, kTest };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

/// Labeled embedding matrix for one (task, language, split).
///
/// Features and logits are kept in binary32 exactly as stored on disk so a
/// write/read cycle is bit-exact; arithmetic widens to binary64 on gather.
struct EmbeddingDataset {
  std::string task;
  std::string language;
  Split split = Split::kTrain;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<float> features;  // num_samples x dim, row-major
  LabelVector labels;
  std::optional<std::vector<float>> logits;  // num_samples x num_classes
  std::string provenance;

  std::size_t num_samples() const noexcept { return labels.size(); }
  bool has_logits() const noexcept { return logits.has_value(); }

  std::span<const float> feature_row(std::size_t i) const noexcept {
    return {features.data() + i * dim, dim};
  }
  std::span<const float> logit_row(std::size_t i) const noexcept {
    return {logits->data() + i * num_classes, num_classes};
  }

  /// Widens the selected rows to a binary64 matrix.
  FeatureMatrix gather(std::span<const std::size_t> indices) const;
  /// Widens every row.
  FeatureMatrix to_matrix() const;

  /// Row indices grouped by class, ascending within each class.
  std::vector<std::vector<std::size_t>> indices_by_class() const;

  friend bool operator==(const EmbeddingDataset&,
                         const EmbeddingDataset&) = default;
};

struct LoadOptions {
  /// Permit classes with no samples (rejected by default).
  bool allow_empty_classes = false;
};

/// Checks every dataset invariant; throws nnfs::Error naming the field.
void validate(const EmbeddingDataset& dataset, const LoadOptions& options = {});

/// Source-language mean representation used for centering.
struct MeanVector {
  std::vector<double> values;
  std::string provenance;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const MeanVector&, const MeanVector&) = default;
};

/// Serializes `dataset` in EMB1 layout. Validation happens before any byte
/// is written.
void write_emb1(const EmbeddingDataset& dataset, std::ostream& out);
EmbeddingDataset read_emb1(std::istream& in, const LoadOptions& options = {});

void save_emb1(const EmbeddingDataset& dataset,
               const std::filesystem::path& path);
EmbeddingDataset load_emb1(const std::filesystem::path& path,
                           const LoadOptions& options = {});

/// Mean over all rows of all datasets using pairwise summation.
MeanVector compute_mean_vector(
    std::span<const EmbeddingDataset* const> datasets);
MeanVector compute_mean_vector(const std::vector<EmbeddingDataset>& datasets);

/// A mean vector is stored as a one-row EMB1 file with label 0.
EmbeddingDataset mean_to_dataset(const MeanVector& mean,
                                 const std::string& task,
                                 const std::string& language);
MeanVector mean_from_dataset(const EmbeddingDataset& dataset);

void save_mean(const MeanVector& mean, const std::string& task,
               const std::string& language, const std::filesystem::path& path);
MeanVector load_mean(const std::filesystem::path& path);

/// `<root>/<task>/<language>/<split>.emb1`
std::filesystem::path split_path(const std::filesystem::path& root,
                                 std::string_view task,
                                 std::string_view language, Split split);
/// `<root>/<task>/mean_src.emb1`
std::filesystem::path mean_path(const std::filesystem::path& root,
                                std::string_view task);

}  // namespace nnfs
