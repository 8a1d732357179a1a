// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nnfs/embedding_store.hpp"
#include "nnfs/feature_matrix.hpp"

namespace fixtures {

inline nnfs::FeatureMatrix random_matrix(std::size_t rows, std::size_t dim,
                                         std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  nnfs::FeatureMatrix m(rows, dim);
  for (auto& v : m.data()) v = normal(gen);
  return m;
}

inline std::vector<std::vector<double>> to_nested(const nnfs::FeatureMatrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out.emplace_back(m.row(i).begin(), m.row(i).end());
  }
  return out;
}

// Balanced dataset with round-robin labels and Gaussian features.
inline nnfs::EmbeddingDataset random_dataset(std::size_t rows, std::size_t dim,
                                             std::size_t num_classes,
                                             bool with_logits,
                                             std::uint64_t seed,
                                             nnfs::Split split = nnfs::Split::kDev) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> normal(0.0F, 1.0F);
  nnfs::EmbeddingDataset d;
  d.task = "toy";
  d.language = "de";
  d.split = split;
  d.dim = dim;
  d.num_classes = num_classes;
  d.features.resize(rows * dim);
  for (auto& v : d.features) v = normal(gen);
  for (std::size_t i = 0; i < rows; ++i) {
    d.labels.push_back(static_cast<nnfs::Label>(i % num_classes));
  }
  if (with_logits) {
    std::vector<float> logits(rows * num_classes);
    for (auto& v : logits) v = normal(gen);
    d.logits = std::move(logits);
  }
  d.provenance = "fixture";
  return d;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("nnfs-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
