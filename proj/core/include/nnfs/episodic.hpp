// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnfs/baselines.hpp"
#include "nnfs/embedding_store.hpp"
#include "nnfs/nnfs.hpp"
#include "nnfs/random.hpp"

namespace nnfs {

/// Inference method evaluated on an episode. The four NN variants map onto
/// NnfsConfig ablation rows.
enum class Method { kZeroShot, kNn, kNnProto, kNnNorm, kNnNormProto, kHeadFt };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view text);
/// Every method in table order: zero-shot, head-ft, then the NN rows.
std::vector<Method> all_methods();
NnfsConfig nnfs_config_for(Method method);
bool method_needs_mean(Method method) noexcept;

struct EpisodeConfig {
  std::size_t ways = 3;
  std::size_t shots = 5;
  std::size_t queries_per_class = 15;
  std::size_t num_episodes = 300;
  std::uint64_t base_seed = 42;
  /// Stop once the 95% half-width falls to this value (after 30 episodes).
  std::optional<double> ci_stop_threshold;

  void validate() const;
  friend bool operator==(const EpisodeConfig&, const EpisodeConfig&) = default;
};

/// Minimum episode count before early stopping may trigger.
inline constexpr std::size_t kMinEpisodesBeforeStop = 30;

struct Episode {
  std::size_t episode_index = 0;
  std::vector<Label> selected_classes;
  std::vector<std::vector<std::size_t>> support_indices;  // per selected class
  std::vector<std::vector<std::size_t>> query_indices;    // per selected class

  friend bool operator==(const Episode&, const Episode&) = default;
};

/// Per-episode RNG: CounterRng(base_seed).split(episode_index).
CounterRng episode_rng(std::uint64_t base_seed, std::size_t episode_index);

/// Pre-grouped class indices so repeated sampling skips the label scan.
class EpisodeSampler {
 public:
  EpisodeSampler(const EmbeddingDataset& support_split,
                 const EmbeddingDataset& query_split,
                 const EpisodeConfig& config);

  Episode sample(std::size_t episode_index) const;

 private:
  std::size_t num_classes_;
  EpisodeConfig config_;
  std::vector<std::vector<std::size_t>> support_by_class_;
  std::vector<std::vector<std::size_t>> query_by_class_;
};

Episode sample_episode(const EmbeddingDataset& support_split,
                       const EmbeddingDataset& query_split,
                       const EpisodeConfig& config, std::size_t episode_index);

struct HeadFtOptions {
  HeadTrainingOptions training{};
};

/// Accuracy of `method` on the episode's query rows.
double score_episode(const Episode& episode,
                     const EmbeddingDataset& support_split,
                     const EmbeddingDataset& query_split, Method method,
                     const MeanVector* mean, const HeadFtOptions& head = {});

struct EvalReport {
  std::string method;
  std::string task;
  std::string language;
  EpisodeConfig config;
  std::vector<double> per_episode_scores;
  double mean_accuracy = 0.0;
  double ci_half_width_95 = 0.0;
  double wall_time_per_episode = 0.0;
  std::size_t episodes_run = 0;
};

double mean_of(std::span<const double> scores);
/// 1.96 * sample standard deviation (n - 1 divisor) / sqrt(n); 0 when n < 2.
double ci_half_width_95(std::span<const double> scores);

struct RunOptions {
  std::size_t threads = 1;
  HeadFtOptions head{};
};

/// Runs the episodic protocol for one method. Scores are ordered by episode
/// index and identical for any thread count.
EvalReport run_evaluation(const EmbeddingDataset& support_split,
                          const EmbeddingDataset& query_split, Method method,
                          const MeanVector* mean, const EpisodeConfig& config,
                          const RunOptions& options = {});

/// Evaluates every method on the same episode stream.
std::vector<EvalReport> compare_methods(const EmbeddingDataset& support_split,
                                        const EmbeddingDataset& query_split,
                                        std::span<const Method> methods,
                                        const MeanVector* mean,
                                        const EpisodeConfig& config,
                                        const RunOptions& options = {});

}  // namespace nnfs
