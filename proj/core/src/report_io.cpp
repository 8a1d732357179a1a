// SPDX-License-Identifier: Apache-2.0
#include "nnfs/report_io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace nnfs {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

void to_json(nlohmann::json& j, const EpisodeConfig& c) {
  j = nlohmann::json{{"ways", c.ways},
                     {"shots", c.shots},
                     {"queries_per_class", c.queries_per_class},
                     {"num_episodes", c.num_episodes},
                     {"base_seed", c.base_seed},
                     {"ci_stop_threshold", nullptr}};
  if (c.ci_stop_threshold) j["ci_stop_threshold"] = *c.ci_stop_threshold;
}

void from_json(const nlohmann::json& j, EpisodeConfig& c) {
  c.ways = j.at("ways").get<std::size_t>();
  c.shots = j.at("shots").get<std::size_t>();
  c.queries_per_class = j.at("queries_per_class").get<std::size_t>();
  c.num_episodes = j.at("num_episodes").get<std::size_t>();
  c.base_seed = j.at("base_seed").get<std::uint64_t>();
  c.ci_stop_threshold.reset();
  if (j.contains("ci_stop_threshold") && !j.at("ci_stop_threshold").is_null()) {
    c.ci_stop_threshold = j.at("ci_stop_threshold").get<double>();
  }
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"method", r.method},
                     {"task", r.task},
                     {"language", r.language},
                     {"config", r.config},
                     {"per_episode_scores", r.per_episode_scores},
                     {"mean_accuracy", r.mean_accuracy},
                     {"ci_half_width_95", r.ci_half_width_95},
                     {"wall_time_per_episode", r.wall_time_per_episode},
                     {"episodes_run", r.episodes_run}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  r.method = j.at("method").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.language = j.at("language").get<std::string>();
  r.config = j.at("config").get<EpisodeConfig>();
  r.per_episode_scores = j.at("per_episode_scores").get<std::vector<double>>();
  r.mean_accuracy = j.at("mean_accuracy").get<double>();
  r.ci_half_width_95 = j.at("ci_half_width_95").get<double>();
  r.wall_time_per_episode = j.at("wall_time_per_episode").get<double>();
  r.episodes_run = j.at("episodes_run").get<std::size_t>();
}

std::string resource_label(const EpisodeConfig& c) {
  return "fs-" + std::to_string(c.ways) + "." + std::to_string(c.shots);
}

std::string reports_to_markdown(const std::vector<EvalReport>& reports) {
  std::size_t method_w = 13;
  for (const auto& r : reports) method_w = std::max(method_w, r.method.size());
  std::ostringstream out;
  out << "| " << pad("Exp. Type", method_w) << " | " << pad("Resource", 11)
      << " | " << pad("Language", 8) << " | " << pad("Acc.", 6) << " | "
      << pad("95% CI", 6) << " | " << pad("Episodes", 8) << " |\n";
  out << "|" << std::string(method_w + 2, '-') << "|" << std::string(13, '-')
      << "|" << std::string(10, '-') << "|" << std::string(8, '-') << "|"
      << std::string(8, '-') << "|" << std::string(10, '-') << "|\n";
  for (const auto& r : reports) {
    out << "| " << pad(r.method, method_w) << " | "
        << pad("en+" + resource_label(r.config), 11) << " | "
        << pad(r.language, 8) << " | "
        << pad(fixed(100.0 * r.mean_accuracy, 1), 6) << " | "
        << pad(fixed(100.0 * r.ci_half_width_95, 2), 6) << " | "
        << pad(std::to_string(r.episodes_run), 8) << " |\n";
  }
  return out.str();
}

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "method,task,language,ways,shots,queries_per_class,base_seed,"
         "episodes_run,mean_accuracy,ci_half_width_95,wall_time_per_episode\n";
  for (const auto& r : reports) {
    char acc[64];
    char ci[64];
    char wall[64];
    std::snprintf(acc, sizeof(acc), "%.17g", r.mean_accuracy);
    std::snprintf(ci, sizeof(ci), "%.17g", r.ci_half_width_95);
    std::snprintf(wall, sizeof(wall), "%.6g", r.wall_time_per_episode);
    out << r.method << ',' << r.task << ',' << r.language << ','
        << r.config.ways << ',' << r.config.shots << ','
        << r.config.queries_per_class << ',' << r.config.base_seed << ','
        << r.episodes_run << ',' << acc << ',' << ci << ',' << wall << '\n';
  }
  return out.str();
}

}  // namespace nnfs
