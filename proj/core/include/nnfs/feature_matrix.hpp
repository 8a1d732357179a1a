// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nnfs {

using Label = std::uint32_t;
using LabelVector = std::vector<Label>;

/// Dense row-major matrix of binary64 values. Rows are feature vectors.
///
/// A matrix may have zero rows (an empty query set, for instance); callers
/// that require data check `empty()` themselves.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t dim, double fill = 0.0)
      : rows_(rows), dim_(dim), data_(rows * dim, fill) {}
  FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> data);

  /// Builds a matrix from nested rows; every row must have the same length.
  static FeatureMatrix from_rows(
      const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<double> row(std::size_t i) noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * dim_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * dim_ + c];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

namespace linalg {

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

/// Cosine similarity clamped to [-1, 1]. Callers must reject zero vectors.
double cosine(std::span<const double> a, std::span<const double> b) noexcept;

/// Numerically stable softmax of `logits` into `out` (same length).
void softmax(std::span<const double> logits, std::span<double> out) noexcept;

/// Index of the largest entry; exact ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values) noexcept;

/// Index of the smallest entry; exact ties resolve to the lowest index.
std::size_t argmin(std::span<const double> values) noexcept;

}  // namespace linalg
}  // namespace nnfs
