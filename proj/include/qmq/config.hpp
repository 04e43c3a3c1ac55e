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

#include <filesystem>
#include <string>

#include <json.hpp>

namespace qmq {

// Parses the TOML subset used by the scenario files: [table] and [a.b] headers,
// key = value with basic strings, integers, floats, booleans and one-line arrays
// of those, and # comments. Throws ConfigError with the line number on anything else.
nlohmann::json parse_toml(const std::string& text);

// .json files are parsed as JSON, everything else as TOML.
nlohmann::json load_config_file(const std::filesystem::path& path);

}  // namespace qmq
