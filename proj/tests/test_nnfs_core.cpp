// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "nnfs/error.hpp"
#include "nnfs/nnfs.hpp"
#include "support/reference_nnfs.hpp"
#include "support/fixtures.hpp"

namespace {

using nnfs::Error;
using nnfs::ErrorKind;
using nnfs::FeatureMatrix;
using nnfs::LabelVector;
using nnfs::MeanVector;
using nnfs::NnfsConfig;
using nnfs::Prototypes;

FeatureMatrix rows(std::vector<std::vector<double>> r) {
  return FeatureMatrix::from_rows(r);
}

void expect_matrix_near(const FeatureMatrix& a, const FeatureMatrix& b,
                        double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.dim(), b.dim());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      EXPECT_NEAR(a(i, j), b(i, j), tol) << "at (" << i << "," << j << ")";
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected nnfs::Error";
  return ErrorKind::kUsage;
}

// Random small episode: every class gets at least one support row.
struct Instance {
  FeatureMatrix support;
  LabelVector labels;
  FeatureMatrix query;
  std::size_t num_classes;
  MeanVector mean;
};

Instance random_instance(std::mt19937_64& gen) {
  std::uniform_int_distribution<std::size_t> c_dist(2, 3);
  std::uniform_int_distribution<std::size_t> n_dist(1, 5);
  std::uniform_int_distribution<std::size_t> d_dist(2, 8);
  std::uniform_int_distribution<std::size_t> q_dist(1, 15);
  Instance in;
  in.num_classes = c_dist(gen);
  const std::size_t shots = n_dist(gen);
  const std::size_t dim = d_dist(gen);
  in.support = fixtures::random_matrix(in.num_classes * shots, dim, gen);
  for (std::size_t i = 0; i < in.support.rows(); ++i) {
    in.labels.push_back(static_cast<nnfs::Label>(i % in.num_classes));
  }
  in.query = fixtures::random_matrix(q_dist(gen), dim, gen);
  const auto m = fixtures::random_matrix(1, dim, gen);
  in.mean.values.assign(m.row(0).begin(), m.row(0).end());
  return in;
}

TEST(CenterAndNormalize, Examples) {
  const auto out = nnfs::center_and_normalize(rows({{4, 5}}), MeanVector{{1, 1}, ""});
  EXPECT_NEAR(out(0, 0), 0.6, 1e-12);
  EXPECT_NEAR(out(0, 1), 0.8, 1e-12);
  const auto out2 = nnfs::center_and_normalize(rows({{0, 3}}), MeanVector{{0, 0}, ""});
  EXPECT_NEAR(out2(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(out2(0, 1), 1.0, 1e-12);
}

TEST(CenterAndNormalize, ZeroRowAfterCenteringNamesRow) {
  try {
    nnfs::center_and_normalize(rows({{2, 2}, {1, 1}}), MeanVector{{1, 1}, ""});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] {
              nnfs::center_and_normalize(rows({{1, 1}}), MeanVector{{1, 1, 1}, ""});
            }),
            ErrorKind::kUsage);
}

TEST(L2Normalize, Examples) {
  const auto out = nnfs::l2_normalize(rows({{3, 4}}));
  EXPECT_NEAR(out(0, 0), 0.6, 1e-12);
  EXPECT_NEAR(out(0, 1), 0.8, 1e-12);
  const auto unit = rows({{0.6, 0.8}, {1, 0}});
  expect_matrix_near(nnfs::l2_normalize(unit), unit, 1e-7);
  EXPECT_EQ(kind_of([] { nnfs::l2_normalize(rows({{0, 0}})); }),
            ErrorKind::kNumeric);
}

TEST(L2Normalize, RowsHaveUnitNorm) {
  std::mt19937_64 gen(4);
  const auto out = nnfs::l2_normalize(fixtures::random_matrix(50, 7, gen));
  for (std::size_t i = 0; i < out.rows(); ++i) {
    EXPECT_NEAR(nnfs::linalg::norm2(out.row(i)), 1.0, 1e-6);
  }
}

TEST(TransductiveShift, Examples) {
  const auto xs = rows({{1, 1}, {1, 1}});
  const auto out = nnfs::transductive_shift(xs, rows({{0, 0}, {2, 0}}));
  expect_matrix_near(out, rows({{0, 1}, {2, 1}}), 1e-12);

  const auto xq = rows({{0, 2}, {2, 0}});
  expect_matrix_near(nnfs::transductive_shift(xs, xq), xq, 1e-12);
}

TEST(TransductiveShift, OutputMeanMatchesSupportMean) {
  std::mt19937_64 gen(8);
  const auto xs = fixtures::random_matrix(7, 5, gen);
  const auto out = nnfs::transductive_shift(xs, fixtures::random_matrix(11, 5, gen));
  for (std::size_t j = 0; j < 5; ++j) {
    double a = 0, b = 0;
    for (std::size_t i = 0; i < xs.rows(); ++i) a += xs(i, j) / xs.rows();
    for (std::size_t i = 0; i < out.rows(); ++i) b += out(i, j) / out.rows();
    EXPECT_NEAR(a, b, 1e-6);
  }
}

TEST(TransductiveShift, AbsorbsConstantTranslation) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto xs = nnfs::l2_normalize(fixtures::random_matrix(6, 4, gen));
    const auto xq = nnfs::l2_normalize(fixtures::random_matrix(9, 4, gen));
    auto moved = xq;
    const auto c = fixtures::random_matrix(1, 4, gen);
    for (std::size_t i = 0; i < moved.rows(); ++i)
      for (std::size_t j = 0; j < 4; ++j) moved(i, j) += 3.0 * c(0, j);
    expect_matrix_near(nnfs::transductive_shift(xs, moved),
                       nnfs::transductive_shift(xs, xq), 1e-6);
  }
}

TEST(TransductiveShift, Errors) {
  EXPECT_EQ(kind_of([] { nnfs::transductive_shift(rows({{1, 1}}), rows({{1, 1, 1}})); }),
            ErrorKind::kUsage);
  EXPECT_EQ(kind_of([] { nnfs::transductive_shift(FeatureMatrix(0, 2), rows({{1, 1}})); }),
            ErrorKind::kUsage);
  EXPECT_EQ(kind_of([] { nnfs::transductive_shift(rows({{1, 1}}), FeatureMatrix(0, 2)); }),
            ErrorKind::kUsage);
}

TEST(ClassPrototypes, Examples) {
  const auto p = nnfs::class_prototypes(rows({{1, 0}, {0, 1}, {5, 5}}), {0, 0, 1}, 2);
  EXPECT_FALSE(p.rectified);
  expect_matrix_near(p.means, rows({{0.5, 0.5}, {5, 5}}), 1e-12);
  EXPECT_EQ(kind_of([] { nnfs::class_prototypes(rows({{1, 0}, {0, 1}}), {0, 1}, 3); }),
            ErrorKind::kInsufficient);
}

TEST(NearestCentroid, ExamplesAndTieBreak) {
  const Prototypes p{rows({{1, 0}, {0, 1}}), false};
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(nnfs::nearest_centroid_assign(rows({{1, 0}, {r, r}, {0, 2}}), p),
            (LabelVector{0, 0, 1}));
  EXPECT_EQ(kind_of([&] { nnfs::nearest_centroid_assign(rows({{0, 0}}), p); }),
            ErrorKind::kNumeric);
}

TEST(NearestCentroid, ScaleInvariant) {
  std::mt19937_64 gen(21);
  const Prototypes p{fixtures::random_matrix(3, 6, gen), false};
  auto q = fixtures::random_matrix(40, 6, gen);
  const auto base = nnfs::nearest_centroid_assign(q, p);
  for (auto& v : q.data()) v *= 17.5;
  EXPECT_EQ(nnfs::nearest_centroid_assign(q, p), base);
}

// Frozen values from an independent scalar script (tools outside the repo).
TEST(ProtoRect, GoldenTwoClassInstance) {
  const auto xs = rows({{1, 0}, {0, 1}});
  const auto xq = rows({{1, 0}, {0, 1}});
  const auto init = nnfs::class_prototypes(xs, {0, 1}, 2);
  const auto out = nnfs::proto_rect(xs, {0, 1}, xq, {0, 1}, init);
  EXPECT_TRUE(out.rectified);
  expect_matrix_near(out.means,
                     rows({{0.7310585786300049, 0}, {0, 0.7310585786300049}}),
                     1e-6);
}

TEST(ProtoRect, GoldenOrthogonalIdentity) {
  const auto eye = rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const LabelVector y{0, 1, 2};
  const auto out =
      nnfs::proto_rect(eye, y, eye, y, nnfs::class_prototypes(eye, y, 3));
  const double w = 0.5761168847658291;  // e / (e + 2)
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(out.means(c, j), c == j ? w : 0.0, 1e-6);
}

TEST(ProtoRect, GoldenSupportOnly) {
  const auto xs = rows({{1, 0}, {0.6, 0.8}, {0, 1}});
  const LabelVector y{0, 0, 1};
  const auto init = nnfs::class_prototypes(xs, y, 2);
  expect_matrix_near(init.means, rows({{0.8, 0.4}, {0, 1}}), 1e-12);
  const auto out = nnfs::proto_rect(xs, y, FeatureMatrix(0, 2), {}, init);
  expect_matrix_near(out.means,
                     rows({{0.5119782536442897, 0.2094357090211267},
                           {0, 0.634781816203262}}),
                     1e-6);
}

TEST(ProtoRect, RenormalizedWeightsGiveSameHardLabels) {
  // Dividing by the summed weights instead of the pooled count rescales each
  // prototype by a positive factor, which cosine distance ignores.
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    auto in = random_instance(gen);
    const auto xs = nnfs::l2_normalize(in.support);
    const auto xq = nnfs::l2_normalize(in.query);
    const auto init = nnfs::class_prototypes(xs, in.labels, in.num_classes);
    const auto pseudo = nnfs::nearest_centroid_assign(xq, init);
    const auto rect = nnfs::proto_rect(xs, in.labels, xq, pseudo, init);

    Prototypes convex{FeatureMatrix(in.num_classes, xs.dim()), true};
    std::vector<double> wsum(in.num_classes, 0.0);
    std::vector<double> sims(in.num_classes), w(in.num_classes);
    const auto add = [&](std::span<const double> x, nnfs::Label c) {
      for (std::size_t k = 0; k < in.num_classes; ++k)
        sims[k] = nnfs::linalg::cosine(x, init.means.row(k));
      nnfs::linalg::softmax(sims, w);
      for (std::size_t j = 0; j < x.size(); ++j) convex.means(c, j) += w[c] * x[j];
      wsum[c] += w[c];
    };
    for (std::size_t i = 0; i < xs.rows(); ++i) add(xs.row(i), in.labels[i]);
    for (std::size_t i = 0; i < xq.rows(); ++i) add(xq.row(i), pseudo[i]);
    for (std::size_t c = 0; c < in.num_classes; ++c)
      for (auto& v : convex.means.row(c)) v /= wsum[c];

    const auto a = nnfs::soft_predictions(xq, rect);
    const auto b = nnfs::soft_predictions(xq, convex);
    EXPECT_EQ(a.hard_labels, b.hard_labels);
    expect_matrix_near(a.distances, b.distances, 1e-9);
  }
}

TEST(ProtoRect, EmptyPooledClassIsError) {
  const auto xs = rows({{1, 0}});
  const Prototypes init{rows({{1, 0}, {0, 1}}), false};
  EXPECT_EQ(kind_of([&] { nnfs::proto_rect(xs, {0}, FeatureMatrix(0, 2), {}, init); }),
            ErrorKind::kInsufficient);
}

TEST(SoftPredictions, ClosedFormSoftmax) {
  // a = [0, 0]
  const Prototypes p{rows({{1, 0}, {0, 1}}), false};
  const double r = 1.0 / std::sqrt(2.0);
  const auto even = nnfs::soft_predictions(rows({{r, r}}), p);
  EXPECT_NEAR(even.distribution(0, 0), 0.5, 1e-12);
  EXPECT_EQ(even.hard_labels[0], 0U);

  std::vector<double> out(2);
  nnfs::linalg::softmax(std::vector<double>{0.0, -std::log(3.0)}, out);
  EXPECT_NEAR(out[0], 0.75, 1e-12);
  EXPECT_NEAR(out[1], 0.25, 1e-12);
  std::vector<double> shifted(2);
  nnfs::linalg::softmax(std::vector<double>{40.0, 40.0 - std::log(3.0)}, shifted);
  EXPECT_NEAR(shifted[0], out[0], 1e-15);
}

TEST(SoftPredictions, DistancesAreCosineDistances) {
  const Prototypes p{rows({{1, 0}, {0, 1}}), false};
  const auto res = nnfs::soft_predictions(rows({{0.6, 0.8}}), p);
  EXPECT_NEAR(res.distances(0, 0), 0.4, 1e-12);
  EXPECT_NEAR(res.distances(0, 1), 0.2, 1e-12);
  EXPECT_EQ(res.hard_labels[0], 1U);
}

TEST(NnfsInfer, AllOffQueryEqualToSupport) {
  const auto xs = rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const auto res =
      nnfs::nnfs_infer(xs, {0, 1, 2}, rows({{0, 1, 0}}), 3, nullptr, NnfsConfig::nn());
  EXPECT_EQ(res.hard_labels[0], 1U);
  EXPECT_NEAR(res.distances(0, 1), 0.0, 1e-12);
}

TEST(NnfsInfer, Deterministic) {
  std::mt19937_64 gen(5);
  const auto in = random_instance(gen);
  const auto a = nnfs::nnfs_infer(in.support, in.labels, in.query, in.num_classes,
                                  &in.mean, NnfsConfig::nn_norm_proto());
  const auto b = nnfs::nnfs_infer(in.support, in.labels, in.query, in.num_classes,
                                  &in.mean, NnfsConfig::nn_norm_proto());
  EXPECT_EQ(a.distribution, b.distribution);
  EXPECT_EQ(a.distances, b.distances);
  EXPECT_EQ(a.hard_labels, b.hard_labels);
}

TEST(NnfsInfer, CenteringWithoutMeanIsUsageError) {
  EXPECT_EQ(kind_of([] {
              nnfs::nnfs_infer(rows({{1, 0}, {0, 1}}), {0, 1}, rows({{1, 1}}), 2,
                               nullptr, NnfsConfig::nn_norm());
            }),
            ErrorKind::kUsage);
}

class OracleEquivalence : public ::testing::TestWithParam<NnfsConfig> {};

TEST_P(OracleEquivalence, MatchesLiteralTranscription) {
  const NnfsConfig cfg = GetParam();
  std::mt19937_64 gen(1234);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(gen);
    const auto res = nnfs::nnfs_infer(in.support, in.labels, in.query,
                                      in.num_classes, &in.mean, cfg);
    std::vector<int> ys(in.labels.begin(), in.labels.end());
    const auto expected = oracle::reference_nnfs(
        fixtures::to_nested(in.support), ys, fixtures::to_nested(in.query),
        static_cast<int>(in.num_classes), in.mean.values, cfg.use_norm,
        cfg.use_shift, cfg.use_proto_rect);
    for (std::size_t i = 0; i < in.query.rows(); ++i)
      for (std::size_t c = 0; c < in.num_classes; ++c)
        EXPECT_NEAR(res.distribution(i, c), expected[i][c], 1e-6);
  }
}

INSTANTIATE_TEST_SUITE_P(ConfigRows, OracleEquivalence,
                         ::testing::Values(NnfsConfig::nn(), NnfsConfig::nn_proto(),
                                           NnfsConfig::nn_norm(),
                                           NnfsConfig::nn_norm_proto(),
                                           NnfsConfig{true, false, true},
                                           NnfsConfig{false, true, false}));

TEST(NnfsInfer, PlainNearestCentroidReduction) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(gen);
    const auto res = nnfs::nnfs_infer(in.support, in.labels, in.query,
                                      in.num_classes, &in.mean, {true, false, false});
    // centroid of centered unit rows, then the closest by cosine
    const auto unit = [&](std::span<const double> r) {
      std::vector<double> v(r.begin(), r.end());
      double n = 0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] -= in.mean.values[j];
        n += v[j] * v[j];
      }
      for (auto& x : v) x /= std::sqrt(n);
      return v;
    };
    std::vector<std::vector<double>> cent(in.num_classes,
                                          std::vector<double>(in.support.dim()));
    for (std::size_t i = 0; i < in.support.rows(); ++i) {
      const auto u = unit(in.support.row(i));
      for (std::size_t j = 0; j < u.size(); ++j) cent[in.labels[i]][j] += u[j];
    }
    for (std::size_t i = 0; i < in.query.rows(); ++i) {
      const auto q = unit(in.query.row(i));
      std::size_t best = 0;
      double best_cos = -2;
      for (std::size_t c = 0; c < in.num_classes; ++c) {
        const double cs = oracle::cos_sim(q, cent[c]);
        if (cs > best_cos) best_cos = cs, best = c;
      }
      EXPECT_EQ(res.hard_labels[i], best);
    }
  }
}

TEST(NnfsInfer, PermutationInvariance) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto in = random_instance(gen);
    for (auto cfg : {NnfsConfig::nn(), NnfsConfig::nn_norm_proto()}) {
      const auto base = nnfs::nnfs_infer(in.support, in.labels, in.query,
                                         in.num_classes, &in.mean, cfg);
      std::vector<std::size_t> sp(in.support.rows()), qp(in.query.rows());
      std::iota(sp.begin(), sp.end(), 0);
      std::iota(qp.begin(), qp.end(), 0);
      std::shuffle(sp.begin(), sp.end(), gen);
      std::shuffle(qp.begin(), qp.end(), gen);
      FeatureMatrix s2(sp.size(), in.support.dim()), q2(qp.size(), in.query.dim());
      LabelVector y2(sp.size());
      for (std::size_t i = 0; i < sp.size(); ++i) {
        std::copy_n(in.support.row(sp[i]).begin(), s2.dim(), s2.row(i).begin());
        y2[i] = in.labels[sp[i]];
      }
      for (std::size_t i = 0; i < qp.size(); ++i) {
        std::copy_n(in.query.row(qp[i]).begin(), q2.dim(), q2.row(i).begin());
      }
      const auto res = nnfs::nnfs_infer(s2, y2, q2, in.num_classes, &in.mean, cfg);
      for (std::size_t i = 0; i < qp.size(); ++i)
        for (std::size_t c = 0; c < in.num_classes; ++c)
          EXPECT_NEAR(res.distribution(i, c), base.distribution(qp[i], c), 1e-6);
    }
  }
}

TEST(NnfsInfer, RowScaleInvariance) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 30; ++trial) {
    auto in = random_instance(gen);
    const auto base = nnfs::nnfs_infer(in.support, in.labels, in.query,
                                       in.num_classes, nullptr, NnfsConfig::nn_proto());
    for (auto& v : in.query.row(0)) v *= 250.0;
    const auto res = nnfs::nnfs_infer(in.support, in.labels, in.query,
                                      in.num_classes, nullptr, NnfsConfig::nn_proto());
    EXPECT_EQ(res.hard_labels, base.hard_labels);
  }
}

TEST(NnfsInfer, FuzzedOutputsAreFiniteDistributions) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 300; ++trial) {
    auto in = random_instance(gen);
    const double s = scale(gen);
    for (auto& v : in.support.data()) v *= s;
    for (auto& v : in.query.data()) v *= s;
    for (auto& v : in.mean.values) v *= s;
    for (auto cfg : {NnfsConfig::nn(), NnfsConfig::nn_proto(), NnfsConfig::nn_norm(),
                     NnfsConfig::nn_norm_proto()}) {
      const auto res = nnfs::nnfs_infer(in.support, in.labels, in.query,
                                        in.num_classes, &in.mean, cfg);
      ASSERT_TRUE(res.distribution.all_finite());
      ASSERT_TRUE(res.distances.all_finite());
      for (std::size_t i = 0; i < res.num_queries(); ++i) {
        double sum = 0;
        for (double p : res.distribution.row(i)) {
          EXPECT_GE(p, 0.0);
          sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-6);
      }
    }
  }
}

TEST(Linalg, ArgTieBreaksToLowestIndex) {
  EXPECT_EQ(nnfs::linalg::argmax(std::vector<double>{1, 3, 3}), 1U);
  EXPECT_EQ(nnfs::linalg::argmin(std::vector<double>{2, 0, 0}), 1U);
}

}  // namespace
