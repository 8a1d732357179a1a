// SPDX-License-Identifier: Apache-2.0
#include "nnfs/nnfs.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nnfs/error.hpp"

namespace nnfs {
namespace {

void require_same_dim(const FeatureMatrix& a, const FeatureMatrix& b,
                      const char* what) {
  if (a.dim() != b.dim()) {
    fail(ErrorKind::kUsage, std::string(what) + ": dim mismatch (" +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()) + ")");
  }
}

void require_nonzero_rows(const FeatureMatrix& x, const char* what) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (!(linalg::norm2(x.row(i)) > 0.0)) {
      fail(ErrorKind::kNumeric, std::string(what) + " row " +
                                    std::to_string(i) +
                                    " has zero norm; cosine is undefined");
    }
  }
}

void check_labels(const LabelVector& labels, std::size_t rows,
                  std::size_t num_classes, const char* what) {
  if (labels.size() != rows) {
    fail(ErrorKind::kUsage, std::string(what) + ": " +
                                std::to_string(labels.size()) +
                                " labels for " + std::to_string(rows) +
                                " rows");
  }
  for (Label l : labels) {
    if (l >= num_classes) {
      fail(ErrorKind::kUsage, std::string(what) + ": label " +
                                  std::to_string(l) + " >= class count " +
                                  std::to_string(num_classes));
    }
  }
}

std::vector<double> column_mean(const FeatureMatrix& x) {
  std::vector<double> mean(x.dim(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < x.dim(); ++j) mean[j] += r[j];
  }
  for (auto& v : mean) v /= static_cast<double>(x.rows());
  return mean;
}

void normalize_rows_in_place(FeatureMatrix& x, const char* what) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    const double n = linalg::norm2(r);
    if (!(n > 0.0)) {
      fail(ErrorKind::kNumeric,
           std::string(what) + ": row " + std::to_string(i) + " is zero");
    }
    for (auto& v : r) v /= n;
  }
}

// rows x C matrix of cos(row_i, prototype_c); norms are computed once.
FeatureMatrix cosine_table(const FeatureMatrix& x, const FeatureMatrix& protos) {
  std::vector<double> proto_norms(protos.rows());
  for (std::size_t c = 0; c < protos.rows(); ++c) {
    proto_norms[c] = linalg::norm2(protos.row(c));
  }
  FeatureMatrix sims(x.rows(), protos.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const double row_norm = linalg::norm2(row);
    for (std::size_t c = 0; c < protos.rows(); ++c) {
      const double cos =
          linalg::dot(row, protos.row(c)) / (row_norm * proto_norms[c]);
      sims(i, c) = std::clamp(cos, -1.0, 1.0);
    }
  }
  return sims;
}

}  // namespace

FeatureMatrix center_and_normalize(const FeatureMatrix& x,
                                   const MeanVector& mean) {
  if (x.dim() != mean.dim()) {
    fail(ErrorKind::kUsage, "center_and_normalize: feature dim " +
                                std::to_string(x.dim()) + " != mean dim " +
                                std::to_string(mean.dim()));
  }
  FeatureMatrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= mean.values[j];
  }
  normalize_rows_in_place(out, "center_and_normalize: zero vector after "
                               "centering");
  return out;
}

FeatureMatrix l2_normalize(const FeatureMatrix& x) {
  FeatureMatrix out = x;
  normalize_rows_in_place(out, "l2_normalize");
  return out;
}

FeatureMatrix transductive_shift(const FeatureMatrix& support,
                                 const FeatureMatrix& query) {
  require_same_dim(support, query, "transductive_shift");
  if (support.empty() || query.empty()) {
    fail(ErrorKind::kUsage, "transductive_shift: empty support or query");
  }
  const auto ms = column_mean(support);
  const auto mq = column_mean(query);
  FeatureMatrix out = query;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += ms[j] - mq[j];
  }
  return out;
}

Prototypes class_prototypes(const FeatureMatrix& support,
                            const LabelVector& labels,
                            std::size_t num_classes) {
  if (num_classes == 0) fail(ErrorKind::kUsage, "class_prototypes: C == 0");
  check_labels(labels, support.rows(), num_classes, "class_prototypes");
  Prototypes protos{FeatureMatrix(num_classes, support.dim()), false};
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < support.rows(); ++i) {
    auto dst = protos.means.row(labels[i]);
    const auto src = support.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      fail(ErrorKind::kInsufficient, "class_prototypes: class " +
                                         std::to_string(c) +
                                         " has no support samples");
    }
    for (auto& v : protos.means.row(c)) v /= static_cast<double>(counts[c]);
  }
  return protos;
}

LabelVector nearest_centroid_assign(const FeatureMatrix& query,
                                    const Prototypes& prototypes) {
  require_same_dim(query, prototypes.means, "nearest_centroid_assign");
  require_nonzero_rows(query, "query");
  require_nonzero_rows(prototypes.means, "prototype");
  const auto sims = cosine_table(query, prototypes.means);
  LabelVector assigned(query.rows());
  std::vector<double> dist(prototypes.num_classes());
  for (std::size_t i = 0; i < query.rows(); ++i) {
    for (std::size_t c = 0; c < dist.size(); ++c) dist[c] = 1.0 - sims(i, c);
    assigned[i] = static_cast<Label>(linalg::argmin(dist));
  }
  return assigned;
}

Prototypes proto_rect(const FeatureMatrix& support,
                      const LabelVector& support_labels,
                      const FeatureMatrix& query,
                      const LabelVector& pseudo_labels,
                      const Prototypes& initial) {
  const std::size_t num_classes = initial.num_classes();
  require_same_dim(support, initial.means, "proto_rect");
  if (!query.empty()) require_same_dim(query, initial.means, "proto_rect");
  check_labels(support_labels, support.rows(), num_classes, "proto_rect support");
  check_labels(pseudo_labels, query.rows(), num_classes, "proto_rect query");
  require_nonzero_rows(initial.means, "prototype");

  require_nonzero_rows(support, "proto_rect support");
  require_nonzero_rows(query, "proto_rect query");

  Prototypes out{FeatureMatrix(num_classes, initial.dim()), true};
  std::vector<std::size_t> pooled(num_classes, 0);
  std::vector<double> weights(num_classes);

  const auto accumulate = [&](const FeatureMatrix& x, const LabelVector& labels) {
    if (x.empty()) return;
    const auto sims = cosine_table(x, initial.means);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const Label c = labels[i];
      linalg::softmax(sims.row(i), weights);
      auto dst = out.means.row(c);
      const auto row = x.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) dst[j] += weights[c] * row[j];
      ++pooled[c];
    }
  };
  accumulate(support, support_labels);
  accumulate(query, pseudo_labels);
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (pooled[c] == 0) {
      fail(ErrorKind::kInsufficient,
           "proto_rect: class " + std::to_string(c) + " has no pooled samples");
    }
    for (auto& v : out.means.row(c)) v /= static_cast<double>(pooled[c]);
  }
  return out;
}

PredictionResult predictions_from_logits(FeatureMatrix logits) {
  PredictionResult result;
  result.distribution = FeatureMatrix(logits.rows(), logits.dim());
  result.hard_labels.resize(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    linalg::softmax(logits.row(i), result.distribution.row(i));
    result.hard_labels[i] =
        static_cast<Label>(linalg::argmax(result.distribution.row(i)));
  }
  return result;
}

PredictionResult soft_predictions(const FeatureMatrix& query,
                                  const Prototypes& prototypes) {
  require_same_dim(query, prototypes.means, "soft_predictions");
  require_nonzero_rows(query, "query");
  require_nonzero_rows(prototypes.means, "prototype");
  const std::size_t num_classes = prototypes.num_classes();
  const auto sims = cosine_table(query, prototypes.means);
  FeatureMatrix distances(query.rows(), num_classes);
  FeatureMatrix neg(query.rows(), num_classes);
  for (std::size_t i = 0; i < query.rows(); ++i) {
    for (std::size_t c = 0; c < num_classes; ++c) {
      distances(i, c) = 1.0 - sims(i, c);
      neg(i, c) = -distances(i, c);
    }
  }
  auto result = predictions_from_logits(std::move(neg));
  result.distances = std::move(distances);
  return result;
}

PredictionResult nnfs_infer(const FeatureMatrix& support,
                            const LabelVector& support_labels,
                            const FeatureMatrix& query,
                            std::size_t num_classes, const MeanVector* mean,
                            const NnfsConfig& config) {
  require_same_dim(support, query, "nnfs_infer");
  FeatureMatrix xs;
  FeatureMatrix xq;
  if (config.use_norm) {
    if (mean == nullptr) {
      fail(ErrorKind::kUsage, "nnfs_infer: centering requires a mean vector");
    }
    xs = center_and_normalize(support, *mean);
    xq = center_and_normalize(query, *mean);
  } else {
    xs = l2_normalize(support);
    xq = l2_normalize(query);
  }
  if (config.use_shift) xq = transductive_shift(xs, xq);

  auto protos = class_prototypes(xs, support_labels, num_classes);
  if (config.use_proto_rect) {
    const auto pseudo = nearest_centroid_assign(xq, protos);
    protos = proto_rect(xs, support_labels, xq, pseudo, protos);
  }
  auto result = soft_predictions(xq, protos);
  if (!result.distribution.all_finite()) {
    fail(ErrorKind::kNumeric, "nnfs_infer: non-finite prediction");
  }
  return result;
}

}  // namespace nnfs
