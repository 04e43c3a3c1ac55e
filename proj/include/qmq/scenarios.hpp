// Copyright 2026 The qmq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qmq {

inline constexpr const char* kVersion = "0.1.0";

// Command-line overrides; unset fields fall back to the [run] table of the config.
struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::filesystem::path config_dir = ".";  // relative paths in the config resolve here
  std::string prefix = "qmq";
  int threads = 0;  // 0 keeps the OpenMP default
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_n;
  std::optional<bool> streaming;
  std::optional<std::string> grid;
  std::optional<std::string> g_file;
};

struct Artifact {
  std::string name;  // file name inside out_dir
  std::string content;
};

struct RunResult {
  std::vector<Artifact> artifacts;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> warnings;
  double max_trace_drift = 0.0;
};

const std::vector<std::string>& scenario_names();

// Runs one scenario without touching the file system. Throws ConfigError for
// malformed entries, ParameterError/DomainError for invalid values and
// ResourceError when a cap would be exceeded.
RunResult run_scenario(const std::string& scenario, const nlohmann::json& config, const RunOptions& options);

// Dry run: parameter checks and a resource estimate, no simulation.
nlohmann::json validate_scenario(const std::string& scenario, const nlohmann::json& config,
                                 const RunOptions& options);

// The options as they were resolved, for the manifest.
nlohmann::json options_to_json(const RunOptions& options);
RunOptions options_from_json(const nlohmann::json& j, RunOptions base);

}  // namespace qmq
