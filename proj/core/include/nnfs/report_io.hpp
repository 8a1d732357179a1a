// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nnfs/episodic.hpp"

/// EvalReport serialization.
///
/// JSON schema of one report:
///   { "method": str, "task": str, "language": str,
///     "config": { "ways": int, "shots": int, "queries_per_class": int,
///                 "num_episodes": int, "base_seed": uint64,
///                 "ci_stop_threshold": number | null },
///     "per_episode_scores": [number...], "mean_accuracy": number,
///     "ci_half_width_95": number, "wall_time_per_episode": number,
///     "episodes_run": int }
namespace nnfs {

void to_json(nlohmann::json& j, const EpisodeConfig& config);
void from_json(const nlohmann::json& j, EpisodeConfig& config);
void to_json(nlohmann::json& j, const EvalReport& report);
void from_json(const nlohmann::json& j, EvalReport& report);

/// Fixed-width markdown table, one row per report: method, resource,
/// accuracy (percent, one decimal), 95% half-width, episodes.
std::string reports_to_markdown(const std::vector<EvalReport>& reports);

/// CSV with a header row and one summary row per report.
std::string reports_to_csv(const std::vector<EvalReport>& reports);

/// "fs-<ways>.<shots>", the preset naming used in result tables.
std::string resource_label(const EpisodeConfig& config);

}  // namespace nnfs
