// SPDX-License-Identifier: Apache-2.0
#include "nnfs/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "nnfs/error.hpp"
#include "nnfs/random.hpp"

namespace nnfs {
namespace {

// Stream tags under the generator seed; fixed so files are reproducible.
enum StreamTag : std::uint64_t {
  kShiftStream = 2,
  kSplitStreamBase = 16,
};

std::vector<double> random_direction(std::size_t dim, CounterRng rng) {
  std::vector<double> v(dim);
  double n = 0.0;
  while (!(n > 0.0)) {
    for (auto& x : v) x = rng.normal();
    n = std::sqrt(linalg::dot(v, v));
  }
  for (auto& x : v) x /= n;
  return v;
}

// Unit vector with squared norm `fraction` inside the class subspace
// {v : v_j = 0 for j >= C, sum_j v_j = 0} and the rest in its complement.
std::vector<double> shift_direction(std::size_t dim, std::size_t num_classes,
                                    double fraction, CounterRng rng) {
  auto in = random_direction(dim, rng.split(0));
  auto out = random_direction(dim, rng.split(1));
  const auto c = static_cast<std::ptrdiff_t>(num_classes);
  std::fill(in.begin() + c, in.end(), 0.0);
  double in_sum = 0.0;
  double out_sum = 0.0;
  for (std::size_t j = 0; j < num_classes; ++j) {
    in_sum += in[j];
    out_sum += out[j];
  }
  for (std::size_t j = 0; j < num_classes; ++j) {
    in[j] -= in_sum / static_cast<double>(num_classes);
    out[j] = out_sum / static_cast<double>(num_classes);
  }
  const double in_norm = linalg::norm2(in);
  const double out_norm = linalg::norm2(out);
  std::vector<double> dir(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    dir[j] = std::sqrt(fraction) * in[j] / in_norm +
             std::sqrt(1.0 - fraction) * out[j] / out_norm;
  }
  return dir;
}

EmbeddingDataset sample_split(const SyntheticSpec& spec,
                              const OracleParams& oracle, const FeatureMatrix& head_w,
                              std::span<const double> head_b, Split split,
                              bool target, std::size_t count, CounterRng rng) {
  EmbeddingDataset d;
  d.task = spec.task;
  d.language = target ? spec.target_language : spec.source_language;
  d.split = split;
  d.dim = spec.dim;
  d.num_classes = spec.num_classes;
  d.features.resize(count * spec.dim);
  d.labels.resize(count);
  std::vector<float> logits(count * spec.num_classes);

  std::vector<double> x(spec.dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = static_cast<Label>(i % spec.num_classes);
    d.labels[i] = c;
    const auto mu = oracle.source_means.row(c);
    for (std::size_t j = 0; j < spec.dim; ++j) {
      x[j] = mu[j] + spec.noise_sigma * rng.normal();
      if (target) x[j] += oracle.shift[j];
      d.features[i * spec.dim + j] = static_cast<float>(x[j]);
    }
    // logits see the stored (binary32) features, as a real model head would
    std::vector<double> stored(d.features.begin() + i * spec.dim,
                               d.features.begin() + (i + 1) * spec.dim);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
      logits[i * spec.num_classes + k] =
          static_cast<float>(linalg::dot(head_w.row(k), stored) + head_b[k]);
    }
  }
  d.logits = std::move(logits);
  d.provenance = "synthetic " + nlohmann::json(spec).dump();
  return d;
}

}  // namespace

void SyntheticSpec::validate() const {
  const auto bad = [](const std::string& msg) {
    fail(ErrorKind::kUsage, "invalid synthetic spec: " + msg);
  };
  if (num_classes < 2) bad("num_classes must be >= 2");
  if (dim < num_classes) bad("dim must be >= num_classes");
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    bad("noise_sigma must be positive");
  }
  if (!(class_separation >= 0.0) || !std::isfinite(class_separation)) {
    bad("class_separation must be >= 0");
  }
  if (!(shift_vector_norm >= 0.0) || !std::isfinite(shift_vector_norm)) {
    bad("shift_vector_norm must be >= 0");
  }
  if (!(shift_class_fraction >= 0.0 && shift_class_fraction <= 1.0)) {
    bad("shift_class_fraction must be in [0, 1]");
  }
  for (std::size_t n :
       {per_split_counts.train, per_split_counts.dev, per_split_counts.test}) {
    if (n < num_classes) bad("every split count must be >= num_classes");
  }
  if (task.empty() || source_language.empty() || target_language.empty()) {
    bad("task and language names must be non-empty");
  }
  if (source_language == target_language) {
    bad("source and target language must differ");
  }
}

void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  j = nlohmann::json{
      {"task", s.task},
      {"source_language", s.source_language},
      {"target_language", s.target_language},
      {"dim", s.dim},
      {"num_classes", s.num_classes},
      {"class_separation", s.class_separation},
      {"shift_vector_norm", s.shift_vector_norm},
      {"shift_class_fraction", s.shift_class_fraction},
      {"per_split_counts",
       {{"train", s.per_split_counts.train},
        {"dev", s.per_split_counts.dev},
        {"test", s.per_split_counts.test}}},
      {"noise_sigma", s.noise_sigma},
      {"seed", s.seed},
  };
}

void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  SyntheticSpec d;
  const auto get_count = [&](const char* key, std::size_t fallback) {
    if (!j.contains("per_split_counts")) return fallback;
    const auto& c = j.at("per_split_counts");
    if (!c.contains(key)) return fallback;
    const auto v = c.at(key).get<long long>();
    if (v < 0) fail(ErrorKind::kUsage, std::string("negative count: ") + key);
    return static_cast<std::size_t>(v);
  };
  const auto get_size = [&](const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto v = j.at(key).get<long long>();
    if (v < 0) fail(ErrorKind::kUsage, std::string("negative value: ") + key);
    return static_cast<std::size_t>(v);
  };
  s.task = j.value("task", d.task);
  s.source_language = j.value("source_language", d.source_language);
  s.target_language = j.value("target_language", d.target_language);
  s.dim = get_size("dim", d.dim);
  s.num_classes = get_size("num_classes", d.num_classes);
  s.class_separation = j.value("class_separation", d.class_separation);
  s.shift_vector_norm = j.value("shift_vector_norm", d.shift_vector_norm);
  s.shift_class_fraction =
      j.value("shift_class_fraction", d.shift_class_fraction);
  s.per_split_counts = {get_count("train", d.per_split_counts.train),
                        get_count("dev", d.per_split_counts.dev),
                        get_count("test", d.per_split_counts.test)};
  s.noise_sigma = j.value("noise_sigma", d.noise_sigma);
  s.seed = j.value("seed", d.seed);
}

SyntheticBundle generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t dim = spec.dim;
  const std::size_t num_classes = spec.num_classes;
  const CounterRng root(spec.seed);
  const double sigma = spec.noise_sigma;

  // Centered simplex vertices e_c - 1/C have pairwise distance sqrt(2).
  const double scale = spec.class_separation * sigma / std::sqrt(2.0);
  OracleParams oracle{FeatureMatrix(num_classes, dim),
                      std::vector<double>(dim, 0.0), sigma};
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double vertex =
          (j == c ? 1.0 : 0.0) - (j < num_classes ? 1.0 / num_classes : 0.0);
      oracle.source_means(c, j) = scale * vertex;
    }
  }
  const auto shift_dir =
      shift_direction(dim, num_classes, spec.shift_class_fraction,
                      root.split(kShiftStream));
  for (std::size_t j = 0; j < dim; ++j) {
    oracle.shift[j] = spec.shift_vector_norm * sigma * shift_dir[j];
  }

  // Source-fit linear classifier: log-likelihood of isotropic Gaussians
  // around the source means, up to a shared constant.
  FeatureMatrix head_w(num_classes, dim);
  std::vector<double> head_b(num_classes);
  const double inv_var = 1.0 / (sigma * sigma);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto mu = oracle.source_means.row(c);
    for (std::size_t j = 0; j < dim; ++j) head_w(c, j) = mu[j] * inv_var;
    head_b[c] = -0.5 * linalg::dot(mu, mu) * inv_var;
  }

  const auto split_rng = [&](std::uint64_t k) {
    return root.split(kSplitStreamBase + k);
  };
  const auto& counts = spec.per_split_counts;
  SyntheticBundle b;
  b.source_train = sample_split(spec, oracle, head_w, head_b, Split::kTrain,
                                false, counts.train, split_rng(0));
  b.source_dev = sample_split(spec, oracle, head_w, head_b, Split::kDev, false,
                              counts.dev, split_rng(1));
  b.source_test = sample_split(spec, oracle, head_w, head_b, Split::kTest,
                               false, counts.test, split_rng(2));
  b.target_dev = sample_split(spec, oracle, head_w, head_b, Split::kDev, true,
                              counts.dev, split_rng(3));
  b.target_test = sample_split(spec, oracle, head_w, head_b, Split::kTest, true,
                               counts.test, split_rng(4));
  const std::vector<const EmbeddingDataset*> src = {&b.source_train,
                                                    &b.source_dev};
  b.source_mean = compute_mean_vector(std::span<const EmbeddingDataset* const>(src));
  b.oracle = std::move(oracle);
  return b;
}

LabelVector bayes_assign(const OracleParams& oracle, const FeatureMatrix& x,
                         bool target) {
  if (x.dim() != oracle.source_means.dim()) {
    fail(ErrorKind::kUsage, "bayes_assign: dim mismatch");
  }
  const std::size_t num_classes = oracle.source_means.rows();
  LabelVector out(x.rows());
  std::vector<double> dist(num_classes);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const auto mu = oracle.source_means.row(c);
      double d2 = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double diff = row[j] - mu[j] - (target ? oracle.shift[j] : 0.0);
        d2 += diff * diff;
      }
      dist[c] = d2;
    }
    out[i] = static_cast<Label>(linalg::argmin(dist));
  }
  return out;
}

void write_bundle(const SyntheticBundle& b, const SyntheticSpec& spec,
                  const std::filesystem::path& root) {
  const auto src = spec.source_language;
  const auto tgt = spec.target_language;
  save_emb1(b.source_train, split_path(root, spec.task, src, Split::kTrain));
  save_emb1(b.source_dev, split_path(root, spec.task, src, Split::kDev));
  save_emb1(b.source_test, split_path(root, spec.task, src, Split::kTest));
  save_emb1(b.target_dev, split_path(root, spec.task, tgt, Split::kDev));
  save_emb1(b.target_test, split_path(root, spec.task, tgt, Split::kTest));
  save_mean(b.source_mean, spec.task, src, mean_path(root, spec.task));
}

}  // namespace nnfs
