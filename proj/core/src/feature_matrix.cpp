// SPDX-License-Identifier: Apache-2.0
#include "nnfs/feature_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "nnfs/error.hpp"

namespace nnfs {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dim,
                             std::vector<double> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    fail(ErrorKind::kUsage, "feature matrix: data size " +
                                std::to_string(data_.size()) + " != rows*dim " +
                                std::to_string(rows_ * dim_));
  }
}

FeatureMatrix FeatureMatrix::from_rows(
    const std::vector<std::vector<double>>& rows) {
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) {
      fail(ErrorKind::kUsage, "feature matrix: ragged rows");
    }
    data.insert(data.end(), r.begin(), r.end());
  }
  return FeatureMatrix(rows.size(), dim, std::move(data));
}

bool FeatureMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

namespace linalg {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) noexcept {
  const double c = dot(a, b) / (norm2(a) * norm2(b));
  return std::clamp(c, -1.0, 1.0);
}

void softmax(std::span<const double> logits, std::span<double> out) noexcept {
  const double hi = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    total += out[i];
  }
  for (auto& v : out) v /= total;
}

std::size_t argmax(std::span<const double> values) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t argmin(std::span<const double> values) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

}  // namespace linalg
}  // namespace nnfs
