// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nnfs/error.hpp"

namespace nnfs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInsufficient = 3;
inline constexpr int kExitNumeric = 4;

int exit_code_for(ErrorKind kind) noexcept;

/// Provenance block embedded in every file the CLI writes.
struct RunManifest {
  std::vector<std::string> command_line;
  nlohmann::json config;
  std::map<std::string, std::string> dataset_checksums;  // path -> sha256
  std::string tool_version;
  std::map<std::string, double> stage_seconds;
};

void to_json(nlohmann::json& j, const RunManifest& manifest);

std::string sha256_file(const std::filesystem::path& path);

/// Entry point for `nnfs <subcommand> ...`; returns the process exit code.
/// argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace nnfs::cli
