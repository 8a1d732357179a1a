// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "nnfs/embedding_store.hpp"
#include "nnfs/episodic.hpp"
#include "nnfs/report_io.hpp"
#include "nnfs/synthetic.hpp"

#ifndef NNFS_VERSION
#define NNFS_VERSION "0.0.0"
#endif

namespace nnfs::cli {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kUsage, path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text(const std::string& text, const std::string& out_path,
                std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  const std::filesystem::path p(out_path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::kIo, "cannot open for writing: " + out_path);
  f << text;
  if (!f) fail(ErrorKind::kIo, "write failed: " + out_path);
}

std::size_t default_threads() {
  if (const char* env = std::getenv("NNFS_THREADS"); env && *env) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    fail(ErrorKind::kUsage, std::string("NNFS_THREADS must be a positive "
                                        "integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::pair<std::size_t, std::size_t> parse_preset(const std::string& preset) {
  // fs-<ways>.<shots>
  const auto dot = preset.find('.');
  if (preset.rfind("fs-", 0) != 0 || dot == std::string::npos) {
    fail(ErrorKind::kUsage,
         "preset must look like fs-<ways>.<shots>, got '" + preset + "'");
  }
  try {
    return {std::stoul(preset.substr(3, dot - 3)),
            std::stoul(preset.substr(dot + 1))};
  } catch (const std::exception&) {
    fail(ErrorKind::kUsage, "bad preset '" + preset + "'");
  }
}

std::vector<Method> parse_methods(const std::string& text) {
  if (text == "all") return all_methods();
  std::vector<Method> methods;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) methods.push_back(parse_method(item));
  }
  if (methods.empty()) fail(ErrorKind::kUsage, "no method selected");
  return methods;
}

std::string format_output(const std::string& format, const RunManifest& manifest,
                          const std::vector<EvalReport>& reports) {
  const json manifest_json = manifest;
  if (format == "json") {
    return json{{"manifest", manifest_json}, {"reports", reports}}.dump(2) +
           "\n";
  }
  if (format == "csv") {
    return "# manifest: " + manifest_json.dump() + "\n" +
           reports_to_csv(reports);
  }
  if (format == "md") {
    return "<!-- manifest: " + manifest_json.dump() + " -->\n\n" +
           reports_to_markdown(reports);
  }
  fail(ErrorKind::kUsage, "format must be json|csv|md, got '" + format + "'");
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string spec;
  std::string out;
};

int cmd_gen(const GenArgs& a, const RunManifest& base, std::ostream& out) {
  const auto start = Clock::now();
  SyntheticSpec spec;
  try {
    spec = read_json_file(a.spec).get<SyntheticSpec>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kUsage, "bad synthetic spec: " + std::string(e.what()));
  }
  spec.validate();
  const auto bundle = generate(spec);
  write_bundle(bundle, spec, a.out);

  RunManifest manifest = base;
  manifest.config = spec;
  manifest.stage_seconds["generate"] = seconds_since(start);
  const std::filesystem::path task_dir = std::filesystem::path(a.out) / spec.task;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(task_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".emb1") {
      manifest.dataset_checksums[entry.path().lexically_relative(a.out).string()] =
          sha256_file(entry.path());
    }
  }
  write_text(json(manifest).dump(2) + "\n",
             (task_dir / "manifest.json").string(), out);
  out << "wrote " << task_dir.string() << " (" << spec.source_language
      << ": train/dev/test, " << spec.target_language
      << ": dev/test, mean_src)\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalSettings {
  std::string data;
  std::string support_split = "dev";
  std::string query_split = "test";
  std::size_t ways = 3;
  std::size_t shots = 5;
  std::size_t queries_per_class = 15;
  std::size_t episodes = 300;
  std::uint64_t seed = 42;
  std::string method = "nn+norm+proto";
  std::string mean;
  std::string format = "json";
  std::string out;
  std::size_t threads = 1;
  std::optional<double> ci_stop;
  std::size_t head_epochs = 300;
  double head_lr = 0.1;
};

json resolved_config(const EvalSettings& s) {
  json j = {{"data", s.data},
            {"support-split", s.support_split},
            {"query-split", s.query_split},
            {"ways", s.ways},
            {"shots", s.shots},
            {"queries-per-class", s.queries_per_class},
            {"episodes", s.episodes},
            {"seed", s.seed},
            {"method", s.method},
            {"mean", s.mean.empty() ? json(nullptr) : json(s.mean)},
            {"format", s.format},
            {"threads", s.threads},
            {"ci-stop", s.ci_stop ? json(*s.ci_stop) : json(nullptr)},
            {"head-epochs", s.head_epochs},
            {"head-lr", s.head_lr}};
  return j;
}

// Applies a config file. A previously written JSON report is accepted too:
// its embedded manifest config is replayed.
void apply_config(EvalSettings& s, json j) {
  if (j.contains("manifest")) j = j.at("manifest").at("config");
  try {
    if (j.contains("preset")) {
      std::tie(s.ways, s.shots) = parse_preset(j.at("preset").get<std::string>());
    }
    const auto str = [&](const char* key, std::string& dst) {
      if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<std::string>();
    };
    const auto num = [&](const char* key, auto& dst) {
      if (j.contains(key) && !j.at(key).is_null()) {
        dst = j.at(key).get<std::remove_reference_t<decltype(dst)>>();
      }
    };
    str("data", s.data);
    str("support-split", s.support_split);
    str("query-split", s.query_split);
    num("ways", s.ways);
    num("shots", s.shots);
    num("queries-per-class", s.queries_per_class);
    num("episodes", s.episodes);
    num("seed", s.seed);
    str("method", s.method);
    str("mean", s.mean);
    str("format", s.format);
    str("out", s.out);
    num("threads", s.threads);
    if (j.contains("ci-stop") && !j.at("ci-stop").is_null()) {
      s.ci_stop = j.at("ci-stop").get<double>();
    }
    num("head-epochs", s.head_epochs);
    num("head-lr", s.head_lr);
  } catch (const json::exception& e) {
    fail(ErrorKind::kUsage, std::string("bad config: ") + e.what());
  }
}

int cmd_eval(const EvalSettings& s, const RunManifest& base, std::ostream& out) {
  if (s.data.empty()) fail(ErrorKind::kUsage, "--data is required");
  const auto methods = parse_methods(s.method);
  const bool needs_mean =
      std::any_of(methods.begin(), methods.end(), method_needs_mean);
  if (needs_mean && s.mean.empty()) {
    fail(ErrorKind::kUsage,
         "method '" + s.method + "' centers on the source mean; pass --mean");
  }
  if (s.threads == 0) fail(ErrorKind::kUsage, "--threads must be >= 1");

  RunManifest manifest = base;
  manifest.config = resolved_config(s);

  auto t = Clock::now();
  const std::filesystem::path dir(s.data);
  const auto support_file =
      dir / (std::string(to_string(parse_split(s.support_split))) + ".emb1");
  const auto query_file =
      dir / (std::string(to_string(parse_split(s.query_split))) + ".emb1");
  if (support_file == query_file) {
    fail(ErrorKind::kUsage, "support and query must come from different splits");
  }
  const auto support = load_emb1(support_file);
  const auto query = load_emb1(query_file);
  manifest.dataset_checksums[support_file.string()] = sha256_file(support_file);
  manifest.dataset_checksums[query_file.string()] = sha256_file(query_file);
  std::optional<MeanVector> mean;
  if (!s.mean.empty()) {
    mean = load_mean(s.mean);
    manifest.dataset_checksums[s.mean] = sha256_file(s.mean);
  }
  manifest.stage_seconds["load"] = seconds_since(t);

  EpisodeConfig config;
  config.ways = s.ways;
  config.shots = s.shots;
  config.queries_per_class = s.queries_per_class;
  config.num_episodes = s.episodes;
  config.base_seed = s.seed;
  config.ci_stop_threshold = s.ci_stop;
  config.validate();

  RunOptions options;
  options.threads = s.threads;
  options.head.training.epochs = s.head_epochs;
  options.head.training.learning_rate = s.head_lr;

  t = Clock::now();
  const auto reports = compare_methods(support, query, methods,
                                       mean ? &*mean : nullptr, config, options);
  manifest.stage_seconds["evaluate"] = seconds_since(t);

  write_text(format_output(s.format, manifest, reports), s.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::size_t dim = 1024;
  std::size_t episodes = 60;
  std::size_t repeats = 3;
  std::uint64_t seed = 7;
  std::string format = "text";
  std::string out;
};

constexpr std::size_t kBenchWarmupEpisodes = 20;

int cmd_bench(const BenchArgs& a, const RunManifest& base, std::ostream& out) {
  if (a.episodes < 50) fail(ErrorKind::kUsage, "--episodes must be >= 50");
  if (a.repeats < 1) fail(ErrorKind::kUsage, "--repeats must be >= 1");

  SyntheticSpec spec;
  spec.task = "bench";
  spec.dim = a.dim;
  spec.num_classes = 3;
  spec.class_separation = 4.0;
  spec.shift_vector_norm = 2.0;
  spec.per_split_counts = {150, 300, 600};
  spec.seed = a.seed;
  const auto bundle = generate(spec);

  EpisodeConfig config;
  config.num_episodes = a.episodes;
  config.base_seed = a.seed;
  RunOptions options;  // single thread: wall time == cost

  json rows = json::array();
  double zero_shot_time = 0.0;
  std::ostringstream table;
  table << std::left << std::setw(16) << "method" << std::right
        << std::setw(16) << "sec/episode" << std::setw(12) << "multiplier"
        << '\n';
  // Warm every method first, then interleave the timed repeats across
  // methods so slow drift on the host hits all of them alike.
  const auto methods = all_methods();
  const auto time_one = [&](Method m, const EpisodeConfig& c) {
    return run_evaluation(bundle.target_dev, bundle.target_test, m,
                          &bundle.source_mean, c, options)
        .wall_time_per_episode;
  };
  EpisodeConfig warm = config;
  warm.num_episodes = kBenchWarmupEpisodes;
  for (Method m : methods) (void)time_one(m, warm);
  std::vector<std::vector<double>> times(methods.size());
  for (std::size_t r = 0; r < a.repeats; ++r) {
    for (std::size_t k = 0; k < methods.size(); ++k) {
      times[k].push_back(time_one(methods[k], config));
    }
  }
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const Method m = methods[k];
    std::sort(times[k].begin(), times[k].end());
    const double median = times[k][times[k].size() / 2];
    if (m == Method::kZeroShot) zero_shot_time = median;
    const double mult = median / zero_shot_time;
    rows.push_back({{"method", to_string(m)},
                    {"seconds_per_episode", median},
                    {"multiplier", mult}});
    table << std::left << std::setw(16) << to_string(m) << std::right
          << std::setw(16) << std::scientific << std::setprecision(3) << median
          << std::setw(11) << std::fixed << std::setprecision(2) << mult
          << "x\n";
  }

  RunManifest manifest = base;
  manifest.config = {{"dim", a.dim},
                     {"episodes", a.episodes},
                     {"repeats", a.repeats},
                     {"seed", a.seed},
                     {"synthetic", spec}};
  if (a.format == "json") {
    write_text(json{{"manifest", manifest}, {"timings", rows}}.dump(2) + "\n",
               a.out, out);
  } else if (a.format == "text") {
    write_text("# manifest: " + json(manifest).dump() + "\n" + table.str(),
               a.out, out);
  } else {
    fail(ErrorKind::kUsage, "bench format must be text|json");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string format = "md";
  std::string out;
};

std::string cell(double accuracy) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * accuracy;
  return s.str();
}

int cmd_report(const ReportArgs& a, const RunManifest& base, std::ostream& out) {
  if (a.inputs.empty()) fail(ErrorKind::kUsage, "report needs --inputs");
  std::vector<EvalReport> reports;
  RunManifest manifest = base;
  for (const auto& path : a.inputs) {
    const json j = read_json_file(path);
    try {
      if (j.contains("reports")) {
        for (const auto& r : j.at("reports")) reports.push_back(r.get<EvalReport>());
      } else {
        reports.push_back(j.get<EvalReport>());
      }
    } catch (const json::exception& e) {
      fail(ErrorKind::kUsage, path + ": not an evaluation report: " + e.what());
    }
    manifest.dataset_checksums[path] = sha256_file(path);
  }
  manifest.config = {{"inputs", a.inputs}, {"format", a.format}};

  const std::string task = reports.front().task;
  std::vector<std::string> methods;
  std::vector<std::string> languages;
  std::map<std::pair<std::string, std::string>, double> grid;
  std::vector<std::string> warnings;
  const EpisodeConfig& ref = reports.front().config;
  for (const auto& r : reports) {
    if (r.task != task) {
      fail(ErrorKind::kUsage, "cannot merge reports from different tasks ('" +
                                  task + "' and '" + r.task + "')");
    }
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    if (std::find(languages.begin(), languages.end(), r.language) ==
        languages.end()) {
      languages.push_back(r.language);
    }
    const auto& c = r.config;
    if (c.ways != ref.ways || c.shots != ref.shots ||
        c.queries_per_class != ref.queries_per_class ||
        c.num_episodes != ref.num_episodes || c.base_seed != ref.base_seed) {
      const std::string w = "conflicting episode configs: " + r.method + "/" +
                            r.language + " ran " + resource_label(c) + " x " +
                            std::to_string(c.num_episodes) + " (seed " +
                            std::to_string(c.base_seed) + ")";
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) {
        warnings.push_back(w);
      }
    }
    grid[{r.method, r.language}] = r.mean_accuracy;
  }

  const auto row_avg = [&](const std::string& m) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& l : languages) {
      if (auto it = grid.find({m, l}); it != grid.end()) {
        sum += it->second;
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
  };

  std::ostringstream text;
  if (a.format == "md") {
    text << "<!-- manifest: " << json(manifest).dump() << " -->\n";
    for (const auto& w : warnings) text << "> warning: " << w << "\n";
    text << "\n| Exp. Type | Resource |";
    for (const auto& l : languages) text << ' ' << l << " |";
    text << " avg |\n|---|---|";
    for (std::size_t i = 0; i <= languages.size(); ++i) text << "---|";
    text << '\n';
    for (const auto& m : methods) {
      text << "| " << m << " | en+" << resource_label(ref) << " |";
      for (const auto& l : languages) {
        auto it = grid.find({m, l});
        text << ' ' << (it == grid.end() ? std::string("-") : cell(it->second))
             << " |";
      }
      text << ' ' << cell(row_avg(m)) << " |\n";
    }
  } else if (a.format == "csv") {
    text << "# manifest: " << json(manifest).dump() << "\n";
    for (const auto& w : warnings) text << "# warning: " << w << "\n";
    text << "method";
    for (const auto& l : languages) text << ',' << l;
    text << ",avg\n";
    for (const auto& m : methods) {
      text << m;
      for (const auto& l : languages) {
        auto it = grid.find({m, l});
        text << ',' << (it == grid.end() ? std::string() : cell(it->second));
      }
      text << ',' << cell(row_avg(m)) << '\n';
    }
  } else {
    fail(ErrorKind::kUsage, "report format must be md|csv");
  }
  write_text(text.str(), a.out, out);
  return kExitOk;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInsufficient:
      return kExitInsufficient;
    case ErrorKind::kNumeric:
      return kExitNumeric;
    case ErrorKind::kUsage:
    case ErrorKind::kFormat:
    case ErrorKind::kIo:
      return kExitUsage;
  }
  return kExitUsage;
}

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"command_line", m.command_line},
                     {"config", m.config},
                     {"dataset_checksums", m.dataset_checksums},
                     {"tool_version", m.tool_version},
                     {"stage_seconds", m.stage_seconds}};
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open: " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[i]);
  }
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Nearest-neighbor few-shot inference and episodic evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NNFS_VERSION);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic EMB1 dataset");
  gen_cmd->add_option("--spec", gen.spec, "Synthetic spec JSON")->required();
  gen_cmd->add_option("--out", gen.out, "Output root directory")->required();

  EvalSettings es;
  std::string config_file;
  std::string preset;
  std::optional<double> ci_stop;
  auto* eval_cmd = app.add_subcommand("eval", "Run episodic evaluation");
  eval_cmd->add_option("--config", config_file,
                       "JSON config mirroring these flags, or a JSON report "
                       "to replay");
  auto* o_data = eval_cmd->add_option("--data", es.data,
                                      "Directory holding <split>.emb1 files");
  auto* o_sup = eval_cmd->add_option("--support-split", es.support_split);
  auto* o_qry = eval_cmd->add_option("--query-split", es.query_split);
  auto* o_preset = eval_cmd->add_option("--preset", preset, "fs-<ways>.<shots>, e.g. fs-3.5");
  auto* o_ways = eval_cmd->add_option("--ways", es.ways);
  auto* o_shots = eval_cmd->add_option("--shots", es.shots);
  auto* o_qpc = eval_cmd->add_option("--queries-per-class", es.queries_per_class);
  auto* o_eps = eval_cmd->add_option("--episodes", es.episodes);
  auto* o_seed = eval_cmd->add_option("--seed", es.seed);
  auto* o_method = eval_cmd->add_option(
      "--method", es.method,
      "zero-shot|nn|nn+proto|nn+norm|nn+norm+proto|head-ft, a comma list, or all");
  auto* o_mean = eval_cmd->add_option("--mean", es.mean, "Source mean EMB1 file");
  auto* o_format = eval_cmd->add_option("--format", es.format, "json|csv|md");
  auto* o_out = eval_cmd->add_option("--out", es.out, "Output file (default stdout)");
  auto* o_threads = eval_cmd->add_option(
      "--threads", es.threads, "Worker threads (fallback: NNFS_THREADS)");
  auto* o_ci = eval_cmd->add_option("--ci-stop", ci_stop,
                                    "Stop once the 95% half-width <= value");
  auto* o_he = eval_cmd->add_option("--head-epochs", es.head_epochs,
                                    "head-ft gradient-descent epochs");
  auto* o_hlr = eval_cmd->add_option(
      "--head-lr", es.head_lr,
      "head-ft learning rate. Defaults to 0.1, not the 7.5e-6 used when "
      "fine-tuning a full language model, which would leave a fresh linear "
      "probe almost untrained");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Per-episode timing of every method");
  bench_cmd->add_option("--dim", bench.dim);
  bench_cmd->add_option("--episodes", bench.episodes, "Timed episodes (>= 50)");
  bench_cmd->add_option("--repeats", bench.repeats, "Median over this many runs");
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--format", bench.format, "text|json");
  bench_cmd->add_option("--out", bench.out);

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Merge reports into a language grid");
  report_cmd->add_option("--inputs", rep.inputs, "JSON report files")->required();
  report_cmd->add_option("--format", rep.format, "md|csv");
  report_cmd->add_option("--out", rep.out);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunManifest manifest;
  manifest.command_line = args;
  manifest.tool_version = NNFS_VERSION;

  try {
    if (*gen_cmd) return cmd_gen(gen, manifest, out);
    if (*bench_cmd) return cmd_bench(bench, manifest, out);
    if (*report_cmd) return cmd_report(rep, manifest, out);

    // eval: defaults < config file < preset flag < explicit flags
    EvalSettings resolved;
    resolved.threads = default_threads();
    if (!config_file.empty()) apply_config(resolved, read_json_file(config_file));
    if (*o_preset) std::tie(resolved.ways, resolved.shots) = parse_preset(preset);
    const auto take = [](CLI::Option* opt, auto& dst, const auto& src) {
      if (opt->count() > 0) dst = src;
    };
    take(o_data, resolved.data, es.data);
    take(o_sup, resolved.support_split, es.support_split);
    take(o_qry, resolved.query_split, es.query_split);
    take(o_ways, resolved.ways, es.ways);
    take(o_shots, resolved.shots, es.shots);
    take(o_qpc, resolved.queries_per_class, es.queries_per_class);
    take(o_eps, resolved.episodes, es.episodes);
    take(o_seed, resolved.seed, es.seed);
    take(o_method, resolved.method, es.method);
    take(o_mean, resolved.mean, es.mean);
    take(o_format, resolved.format, es.format);
    take(o_out, resolved.out, es.out);
    take(o_threads, resolved.threads, es.threads);
    take(o_he, resolved.head_epochs, es.head_epochs);
    take(o_hlr, resolved.head_lr, es.head_lr);
    if (o_ci->count() > 0) resolved.ci_stop = ci_stop;
    return cmd_eval(resolved, manifest, out);
  } catch (const Error& e) {
    err << "nnfs: error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "nnfs: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "nnfs: error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace nnfs::cli
