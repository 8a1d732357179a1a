// SPDX-License-Identifier: Apache-2.0
#include "nnfs/episodic.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "nnfs/error.hpp"

namespace nnfs {
namespace {

struct EpisodeData {
  FeatureMatrix support;
  LabelVector support_labels;
  FeatureMatrix query;
  LabelVector query_labels;  // local, index into selected_classes
  std::vector<std::size_t> query_rows;
};

EpisodeData materialize(const Episode& episode,
                        const EmbeddingDataset& support_split,
                        const EmbeddingDataset& query_split, bool features) {
  EpisodeData data;
  std::vector<std::size_t> support_rows;
  for (std::size_t k = 0; k < episode.selected_classes.size(); ++k) {
    for (std::size_t idx : episode.support_indices[k]) {
      support_rows.push_back(idx);
      data.support_labels.push_back(static_cast<Label>(k));
    }
    for (std::size_t idx : episode.query_indices[k]) {
      data.query_rows.push_back(idx);
      data.query_labels.push_back(static_cast<Label>(k));
    }
  }
  if (features) {
    data.support = support_split.gather(support_rows);
    data.query = query_split.gather(data.query_rows);
  }
  return data;
}

// Runs fn(e) for e in [lo, hi) on up to `threads` workers. The exception
// from the lowest failing episode index is rethrown.
template <typename Fn>
void parallel_episodes(std::size_t lo, std::size_t hi, std::size_t threads,
                       Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, hi - lo));
  if (threads == 1) {
    for (std::size_t e = lo; e < hi; ++e) fn(e);
    return;
  }
  std::atomic<std::size_t> next{lo};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = hi;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t e = next++; e < hi; e = next++) {
        try {
          fn(e);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (e < error_index) {
            error_index = e;
            error = std::current_exception();
          }
        }
      }
    });
  }
  workers.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::kZeroShot:
      return "zero-shot";
    case Method::kNn:
      return "nn";
    case Method::kNnProto:
      return "nn+proto";
    case Method::kNnNorm:
      return "nn+norm";
    case Method::kNnNormProto:
      return "nn+norm+proto";
    case Method::kHeadFt:
      return "head-ft";
  }
  return "nn";
}

Method parse_method(std::string_view text) {
  for (Method m : all_methods()) {
    if (to_string(m) == text) return m;
  }
  fail(ErrorKind::kUsage,
       "unknown method '" + std::string(text) +
           "' (expected zero-shot|nn|nn+proto|nn+norm|nn+norm+proto|head-ft)");
}

std::vector<Method> all_methods() {
  return {Method::kZeroShot, Method::kHeadFt,  Method::kNn,
          Method::kNnProto,  Method::kNnNorm, Method::kNnNormProto};
}

NnfsConfig nnfs_config_for(Method method) {
  switch (method) {
    case Method::kNn:
      return NnfsConfig::nn();
    case Method::kNnProto:
      return NnfsConfig::nn_proto();
    case Method::kNnNorm:
      return NnfsConfig::nn_norm();
    case Method::kNnNormProto:
      return NnfsConfig::nn_norm_proto();
    default:
      fail(ErrorKind::kUsage,
           std::string(to_string(method)) + " is not a nearest-neighbor method");
  }
}

bool method_needs_mean(Method method) noexcept {
  return method == Method::kNnNorm || method == Method::kNnNormProto;
}

void EpisodeConfig::validate() const {
  if (ways < 2) fail(ErrorKind::kUsage, "ways must be >= 2");
  if (shots < 1) fail(ErrorKind::kUsage, "shots must be >= 1");
  if (queries_per_class < 1) {
    fail(ErrorKind::kUsage, "queries_per_class must be >= 1");
  }
  if (num_episodes < 1) fail(ErrorKind::kUsage, "num_episodes must be >= 1");
  if (ci_stop_threshold && !(*ci_stop_threshold > 0.0)) {
    fail(ErrorKind::kUsage, "ci_stop_threshold must be > 0");
  }
}

CounterRng episode_rng(std::uint64_t base_seed, std::size_t episode_index) {
  return CounterRng(base_seed).split(episode_index);
}

EpisodeSampler::EpisodeSampler(const EmbeddingDataset& support_split,
                               const EmbeddingDataset& query_split,
                               const EpisodeConfig& config)
    : num_classes_(support_split.num_classes), config_(config) {
  config_.validate();
  if (query_split.num_classes != num_classes_) {
    fail(ErrorKind::kUsage, "support and query splits disagree on num_classes");
  }
  if (query_split.dim != support_split.dim) {
    fail(ErrorKind::kUsage, "support and query splits disagree on dim");
  }
  if (config_.ways > num_classes_) {
    fail(ErrorKind::kInsufficient,
         "ways=" + std::to_string(config_.ways) + " exceeds num_classes=" +
             std::to_string(num_classes_));
  }
  support_by_class_ = support_split.indices_by_class();
  query_by_class_ = query_split.indices_by_class();
  for (std::size_t c = 0; c < num_classes_; ++c) {
    if (support_by_class_[c].size() < config_.shots) {
      fail(ErrorKind::kInsufficient,
           "class " + std::to_string(c) + " has " +
               std::to_string(support_by_class_[c].size()) +
               " samples in support split '" +
               std::string(to_string(support_split.split)) + "', need " +
               std::to_string(config_.shots));
    }
    if (query_by_class_[c].size() < config_.queries_per_class) {
      fail(ErrorKind::kInsufficient,
           "class " + std::to_string(c) + " has " +
               std::to_string(query_by_class_[c].size()) +
               " samples in query split '" +
               std::string(to_string(query_split.split)) + "', need " +
               std::to_string(config_.queries_per_class));
    }
  }
}

Episode EpisodeSampler::sample(std::size_t episode_index) const {
  auto rng = episode_rng(config_.base_seed, episode_index);
  std::vector<Label> classes(num_classes_);
  std::iota(classes.begin(), classes.end(), Label{0});

  Episode ep;
  ep.episode_index = episode_index;
  ep.selected_classes = sample_without_replacement<Label>(classes, config_.ways, rng);
  for (Label c : ep.selected_classes) {
    ep.support_indices.push_back(sample_without_replacement<std::size_t>(
        support_by_class_[c], config_.shots, rng));
    ep.query_indices.push_back(sample_without_replacement<std::size_t>(
        query_by_class_[c], config_.queries_per_class, rng));
  }
  return ep;
}

Episode sample_episode(const EmbeddingDataset& support_split,
                       const EmbeddingDataset& query_split,
                       const EpisodeConfig& config, std::size_t episode_index) {
  return EpisodeSampler(support_split, query_split, config)
      .sample(episode_index);
}

double score_episode(const Episode& episode,
                     const EmbeddingDataset& support_split,
                     const EmbeddingDataset& query_split, Method method,
                     const MeanVector* mean, const HeadFtOptions& head) {
  const bool needs_features = method != Method::kZeroShot;
  const auto data =
      materialize(episode, support_split, query_split, needs_features);
  if (data.query_labels.empty()) {
    fail(ErrorKind::kUsage, "episode has no queries");
  }
  const std::size_t ways = episode.selected_classes.size();

  std::size_t correct = 0;
  if (method == Method::kZeroShot) {
    const auto pred = zero_shot_predict(query_split, data.query_rows);
    for (std::size_t i = 0; i < pred.hard_labels.size(); ++i) {
      const Label truth = episode.selected_classes[data.query_labels[i]];
      correct += pred.hard_labels[i] == truth ? 1 : 0;
    }
  } else {
    PredictionResult pred;
    if (method == Method::kHeadFt) {
      const auto xs = l2_normalize(data.support);
      const auto xq = l2_normalize(data.query);
      const auto trained =
          train_head(xs, data.support_labels, ways, head.training);
      pred = head_predict(trained, xq);
    } else {
      if (method_needs_mean(method) && mean == nullptr) {
        fail(ErrorKind::kUsage, std::string(to_string(method)) +
                                    " requires the source mean vector");
      }
      pred = nnfs_infer(data.support, data.support_labels, data.query, ways,
                        mean, nnfs_config_for(method));
    }
    for (std::size_t i = 0; i < pred.hard_labels.size(); ++i) {
      correct += pred.hard_labels[i] == data.query_labels[i] ? 1 : 0;
    }
  }
  return static_cast<double>(correct) /
         static_cast<double>(data.query_labels.size());
}

double mean_of(std::span<const double> scores) {
  if (scores.empty()) return 0.0;
  return std::accumulate(scores.begin(), scores.end(), 0.0) /
         static_cast<double>(scores.size());
}

double ci_half_width_95(std::span<const double> scores) {
  const std::size_t n = scores.size();
  if (n < 2) return 0.0;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) return 0.0;
  const double m = mean_of(scores);
  double ss = 0.0;
  for (double s : scores) ss += (s - m) * (s - m);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(n));
}

EvalReport run_evaluation(const EmbeddingDataset& support_split,
                          const EmbeddingDataset& query_split, Method method,
                          const MeanVector* mean, const EpisodeConfig& config,
                          const RunOptions& options) {
  if (method == Method::kZeroShot && !query_split.has_logits()) {
    fail(ErrorKind::kUsage, "zero-shot requires has_logits=true on " +
                                query_split.language + "/" +
                                std::string(to_string(query_split.split)));
  }
  if (method_needs_mean(method)) {
    if (mean == nullptr) {
      fail(ErrorKind::kUsage, std::string(to_string(method)) +
                                  " requires the source mean vector");
    }
    if (mean->dim() != support_split.dim) {
      fail(ErrorKind::kUsage, "mean vector dim " +
                                  std::to_string(mean->dim()) +
                                  " != dataset dim " +
                                  std::to_string(support_split.dim));
    }
  }
  const EpisodeSampler sampler(support_split, query_split, config);
  const auto start = std::chrono::steady_clock::now();

  std::vector<double> scores(config.num_episodes, 0.0);
  const auto run_one = [&](std::size_t e) {
    scores[e] = score_episode(sampler.sample(e), support_split, query_split,
                              method, mean, options.head);
  };

  std::size_t episodes_run = config.num_episodes;
  if (!config.ci_stop_threshold) {
    parallel_episodes(0, config.num_episodes, options.threads, run_one);
  } else {
    // Episodes run in chunks; the stop point is the first prefix length
    // (>= kMinEpisodesBeforeStop) meeting the threshold, so it does not
    // depend on chunking or thread count.
    const std::size_t chunk = std::max<std::size_t>(32, 8 * options.threads);
    std::size_t done = 0;
    bool stopped = false;
    while (done < config.num_episodes && !stopped) {
      const std::size_t hi = std::min(config.num_episodes, done + chunk);
      parallel_episodes(done, hi, options.threads, run_one);
      for (std::size_t n = std::max(done + 1, kMinEpisodesBeforeStop); n <= hi;
           ++n) {
        if (ci_half_width_95(std::span(scores).first(n)) <=
            *config.ci_stop_threshold) {
          episodes_run = n;
          stopped = true;
          break;
        }
      }
      done = hi;
    }
    scores.resize(episodes_run);
  }
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;

  EvalReport report;
  report.method = std::string(to_string(method));
  report.task = query_split.task;
  report.language = query_split.language;
  report.config = config;
  report.per_episode_scores = std::move(scores);
  report.episodes_run = episodes_run;
  report.mean_accuracy = mean_of(report.per_episode_scores);
  report.ci_half_width_95 = ci_half_width_95(report.per_episode_scores);
  report.wall_time_per_episode =
      elapsed.count() / static_cast<double>(episodes_run);
  return report;
}

std::vector<EvalReport> compare_methods(const EmbeddingDataset& support_split,
                                        const EmbeddingDataset& query_split,
                                        std::span<const Method> methods,
                                        const MeanVector* mean,
                                        const EpisodeConfig& config,
                                        const RunOptions& options) {
  std::vector<EvalReport> reports;
  reports.reserve(methods.size());
  for (Method m : methods) {
    reports.push_back(
        run_evaluation(support_split, query_split, m, mean, config, options));
  }
  return reports;
}

}  // namespace nnfs
