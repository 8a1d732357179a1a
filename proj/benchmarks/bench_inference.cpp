// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <map>
#include <sstream>

#include "nnfs/baselines.hpp"
#include "nnfs/episodic.hpp"
#include "nnfs/nnfs.hpp"
#include "nnfs/synthetic.hpp"

namespace {

const nnfs::SyntheticBundle& bundle(std::size_t dim) {
  static std::map<std::size_t, nnfs::SyntheticBundle> cache;
  auto it = cache.find(dim);
  if (it == cache.end()) {
    nnfs::SyntheticSpec spec;
    spec.dim = dim;
    spec.shift_vector_norm = 2.0;
    spec.per_split_counts = {150, 300, 600};
    it = cache.emplace(dim, nnfs::generate(spec)).first;
  }
  return it->second;
}

struct EpisodeMatrices {
  nnfs::FeatureMatrix support;
  nnfs::LabelVector labels;
  nnfs::FeatureMatrix query;
};

EpisodeMatrices episode_matrices(std::size_t dim) {
  const auto& b = bundle(dim);
  const auto ep = nnfs::sample_episode(b.target_dev, b.target_test, {}, 0);
  std::vector<std::size_t> s, q;
  EpisodeMatrices m;
  for (std::size_t k = 0; k < ep.selected_classes.size(); ++k) {
    for (auto i : ep.support_indices[k]) {
      s.push_back(i);
      m.labels.push_back(static_cast<nnfs::Label>(k));
    }
    q.insert(q.end(), ep.query_indices[k].begin(), ep.query_indices[k].end());
  }
  m.support = b.target_dev.gather(s);
  m.query = b.target_test.gather(q);
  return m;
}

void BM_NnfsInfer(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto m = episode_matrices(dim);
  const auto& mean = bundle(dim).source_mean;
  const nnfs::NnfsConfig configs[] = {nnfs::NnfsConfig::nn(), nnfs::NnfsConfig::nn_proto(),
                                      nnfs::NnfsConfig::nn_norm(),
                                      nnfs::NnfsConfig::nn_norm_proto()};
  const auto cfg = configs[state.range(1)];
  for (auto _ : state) {
    benchmark::DoNotOptimize(nnfs::nnfs_infer(m.support, m.labels, m.query, 3, &mean, cfg));
  }
}
BENCHMARK(BM_NnfsInfer)->ArgsProduct({{64, 1024}, {0, 1, 2, 3}})->ArgNames({"dim", "cfg"});

void BM_TrainHead(benchmark::State& state) {
  const auto m = episode_matrices(static_cast<std::size_t>(state.range(0)));
  const auto xs = nnfs::l2_normalize(m.support);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nnfs::train_head(xs, m.labels, 3));
  }
}
BENCHMARK(BM_TrainHead)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ZeroShot(benchmark::State& state) {
  const auto& b = bundle(1024);
  std::vector<std::size_t> idx(45);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nnfs::zero_shot_predict(b.target_test, idx));
  }
}
BENCHMARK(BM_ZeroShot);

void BM_SampleEpisode(benchmark::State& state) {
  const auto& b = bundle(1024);
  const nnfs::EpisodeSampler sampler(b.target_dev, b.target_test, {});
  std::size_t e = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(e++));
}
BENCHMARK(BM_SampleEpisode);

void BM_ReadEmb1(benchmark::State& state) {
  std::ostringstream out;
  nnfs::write_emb1(bundle(1024).target_test, out);
  const std::string bytes = out.str();
  for (auto _ : state) {
    std::istringstream in(bytes);
    benchmark::DoNotOptimize(nnfs::read_emb1(in));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_ReadEmb1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
