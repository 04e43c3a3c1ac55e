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

#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmq/config.hpp"
#include "qmq/errors.hpp"
#include "qmq/scenarios.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitResource = 4;

struct Flags {
  std::string config;
  std::string out = ".";
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_n;
  std::optional<std::string> streaming;
  std::optional<std::string> grid;
  std::optional<std::string> g_file;
};

void add_flags(CLI::App* cmd, Flags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "scenario file (TOML subset, JSON, or a run manifest)");
  if (config_required) c->required();
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--max-n", f.max_n, "largest number of meter steps");
  cmd->add_option("--streaming", f.streaming, "on: two benchmark probes; off: full transfer matrices")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--grid", f.grid, "step grid (log:MIN:MAX:COUNT, dense:MAX, list) or NTHETAxNPHI for sweetspot");
  cmd->add_option("--g-file", f.g_file, "g-tensor pair CSV for sweetspot");
}

struct Loaded {
  nlohmann::json config = nlohmann::json::object();
  std::string scenario;  // from the file, if any
  qmq::RunOptions options;
};

Loaded load(const Flags& f) {
  Loaded l;
  qmq::RunOptions& o = l.options;
  o.out_dir = f.out;
  o.threads = f.threads;
  o.seed = f.seed;
  o.max_n = f.max_n;
  if (f.streaming) o.streaming = *f.streaming == "on";
  o.grid = f.grid;
  o.g_file = f.g_file;
  if (!f.config.empty()) {
    const std::filesystem::path path(f.config);
    nlohmann::json j = qmq::load_config_file(path);
    o.config_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    o.prefix = path.stem().string();
    if (j.contains("qmq_manifest")) {
      l.scenario = j.value("scenario", "");
      o = qmq::options_from_json(j.value("options", nlohmann::json::object()), o);
      if (j.contains("config_dir")) o.config_dir = j["config_dir"].get<std::string>();
      o.prefix = j["options"].value("prefix", o.prefix);
      j = j["config"];
    } else if (j.contains("scenario")) {
      if (!j["scenario"].is_string()) throw qmq::ConfigError("scenario: expected a string");
      l.scenario = j["scenario"].get<std::string>();
    }
    l.config = std::move(j);
  } else if (f.g_file) {
    o.prefix = std::filesystem::path(*f.g_file).stem().string();
  }
  if (o.threads > 0) omp_set_num_threads(o.threads);
  return l;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

int run(const std::string& scenario, const Flags& f) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded l = load(f);
  const qmq::RunResult r = qmq::run_scenario(scenario, l.config, l.options);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::create_directories(l.options.out_dir);
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& a : r.artifacts) {
    write_file(l.options.out_dir / a.name, a.content);
    outputs.push_back(a.name);
    std::cout << "wrote " << (l.options.out_dir / a.name).string() << "\n";
  }
  const nlohmann::json manifest{{"qmq_manifest", 1},
                                {"version", qmq::kVersion},
                                {"scenario", scenario},
                                {"config", l.config},
                                {"config_dir", std::filesystem::absolute(l.options.config_dir).string()},
                                {"options", qmq::options_to_json(l.options)},
                                {"openmp_max_threads", omp_get_max_threads()},
                                {"wall_time_s", wall},
                                {"max_trace_drift", r.max_trace_drift},
                                {"outputs", outputs},
                                {"warnings", r.warnings},
                                {"summary", r.summary}};
  const std::string manifest_name = l.options.prefix + "_" + scenario + "_manifest.json";
  write_file(l.options.out_dir / manifest_name, manifest.dump(2) + "\n");
  std::cout << "wrote " << (l.options.out_dir / manifest_name).string() << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int validate(const Flags& f) {
  const Loaded l = load(f);
  if (l.scenario.empty()) throw qmq::ConfigError("the config has no 'scenario' entry to validate against");
  const nlohmann::json report = qmq::validate_scenario(l.scenario, l.config, l.options);
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count-resolved simulation of charge-sensor qubit readout"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;
  for (const auto& name : qmq::scenario_names()) {
    auto* cmd = app.add_subcommand(name, "run the " + name + " scenario");
    add_flags(cmd, flags, name != "sweetspot");
    cmd->callback([&chosen, name] { chosen = name; });
  }
  auto* val = app.add_subcommand("validate", "check a scenario file without simulating");
  add_flags(val, flags, true);
  val->callback([&chosen] { chosen = "validate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    return chosen == "validate" ? validate(flags) : run(chosen, flags);
  } catch (const qmq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitParse;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitParse;
  } catch (const qmq::ParameterError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qmq::DomainError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qmq::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
