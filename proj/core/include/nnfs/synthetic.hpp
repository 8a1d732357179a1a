// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nnfs/embedding_store.hpp"
#include "nnfs/feature_matrix.hpp"

namespace nnfs {

struct SplitCounts {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;

  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// Gaussian-mixture stand-in for a source language and one shifted target.
///
/// Class means sit on the vertices of a regular simplex (first num_classes
/// coordinates) with pairwise distance class_separation * noise_sigma.
/// Target-language samples receive one fixed random offset of norm
/// shift_vector_norm * noise_sigma.
///
/// The offset splits into a part inside the class-mean subspace, which moves
/// samples across the source decision boundaries, and a part orthogonal to
/// it. shift_class_fraction is the share of the squared norm placed in the
/// subspace; each part has a uniformly random direction within its space.

struct SyntheticSpec {
  std::string task = "synth";
  std::string source_language = "en";
  std::string target_language = "xx";
  std::size_t dim = 16;
  std::size_t num_classes = 3;
  double class_separation = 4.0;
  double shift_vector_norm = 0.0;
  double shift_class_fraction = 0.5;
  /// Total rows per split; row i has label i mod num_classes.
  SplitCounts per_split_counts{200, 100, 100};
  double noise_sigma = 1.0;
  std::uint64_t seed = 42;

  void validate() const;
  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

void to_json(nlohmann::json& j, const SyntheticSpec& spec);
void from_json(const nlohmann::json& j, SyntheticSpec& spec);

/// Parameters of the generating mixture, used by the Bayes oracle.
struct OracleParams {
  FeatureMatrix source_means;  // C x dim
  std::vector<double> shift;   // dim; zero vector when there is no shift
  double noise_sigma = 1.0;
};

struct SyntheticBundle {
  EmbeddingDataset source_train;
  EmbeddingDataset source_dev;
  EmbeddingDataset source_test;
  EmbeddingDataset target_dev;
  EmbeddingDataset target_test;
  MeanVector source_mean;  // over source train + dev
  OracleParams oracle;
};

SyntheticBundle generate(const SyntheticSpec& spec);

/// Nearest true class mean (the maximum-likelihood class for isotropic
/// Gaussians with equal priors). With `target` set, the means include the
/// language shift.
LabelVector bayes_assign(const OracleParams& oracle, const FeatureMatrix& x,
                         bool target = false);

/// Writes the bundle as `<root>/<task>/<language>/<split>.emb1` plus
/// `<root>/<task>/mean_src.emb1`.
void write_bundle(const SyntheticBundle& bundle, const SyntheticSpec& spec,
                  const std::filesystem::path& root);

}  // namespace nnfs
