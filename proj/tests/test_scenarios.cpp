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

#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <sstream>
#include <string>

#include "qmq/errors.hpp"
#include "qmq/scenarios.hpp"

using namespace qmq;
using nlohmann::json;

namespace {

const Artifact& artifact(const RunResult& r, const std::string& name) {
  for (const auto& a : r.artifacts)
    if (a.name == name) return a;
  FAIL("missing artifact " << name);
  return r.artifacts.front();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("scenario list") {
  const auto& names = scenario_names();
  CHECK(names.size() == 5);
  CHECK(std::find(names.begin(), names.end(), "sme-compare") != names.end());
  CHECK_THROWS_AS(run_scenario("nope", json::object(), RunOptions{}), ConfigError);
}

TEST_CASE("charge-readout output does not depend on the thread count") {
  const json cfg = json::parse(R"({"charge": {"t": [0.0, 2.0]}, "run": {"max_n": 300, "grid_points": 12}})");
  RunOptions opt;
  opt.prefix = "x";
  omp_set_num_threads(1);
  const RunResult a = run_scenario("charge-readout", cfg, opt);
  omp_set_num_threads(4);
  const RunResult b = run_scenario("charge-readout", cfg, opt);
  omp_set_num_threads(1);
  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
    CHECK(a.artifacts[i].name == b.artifacts[i].name);
    CHECK(a.artifacts[i].content == b.artifacts[i].content);
  }
  const std::string& inf = artifact(a, "x_infidelity.csv").content;
  CHECK(inf.rfind("t_ueV,n_steps,tau_ns,infidelity,eps_up,eps_down,k_critical,trace_drift\n", 0) == 0);
  CHECK(line_count(inf) == 1 + 2 * 12);
  CHECK(a.max_trace_drift < 1e-10);
}

TEST_CASE("full-history and streaming runs agree") {
  json cfg = json::parse(R"({"spin": {"delta_z": [0.05], "delta_x": [0.05]}, "run": {"max_n": 120, "grid_points": 6}})");
  RunOptions opt;
  opt.streaming = true;
  const RunResult s = run_scenario("spin-readout", cfg, opt);
  opt.streaming = false;
  const RunResult f = run_scenario("spin-readout", cfg, opt);
  const std::string a = artifact(s, "qmq_infidelity.csv").content;
  const std::string b = artifact(f, "qmq_infidelity.csv").content;
  REQUIRE(line_count(a) == line_count(b));
  std::istringstream sa(a), sb(b);
  std::string la, lb;
  std::getline(sa, la);
  std::getline(sb, lb);
  while (std::getline(sa, la) && std::getline(sb, lb)) {
    // columns: delta_z, n_steps, tau, infidelity, ...
    auto field = [](const std::string& line, int i) {
      std::stringstream ss(line);
      std::string cell;
      for (int k = 0; k <= i; ++k) std::getline(ss, cell, ',');
      return std::stod(cell);
    };
    CHECK(field(la, 1) == field(lb, 1));
    CHECK(field(la, 3) == doctest::Approx(field(lb, 3)).epsilon(1e-10));
  }
  CHECK(artifact(s, "qmq_leakage.csv").content.find("rate_law") != std::string::npos);
}

TEST_CASE("sweetspot scenario emits the requested map") {
  RunOptions opt;
  opt.grid = "7x12";
  const RunResult r = run_scenario("sweetspot", json::object(), opt);
  CHECK(line_count(artifact(r, "qmq_map.csv").content) == 1 + 7 * 12);
  const json spots = json::parse(artifact(r, "qmq_sweetspot.json").content);
  CHECK(spots.is_object());
}

TEST_CASE("validation catches bad parameters and resource overruns") {
  RunOptions opt;
  const json ok = json::parse(R"({"charge": {"t": [0.5]}})");
  CHECK(validate_scenario("charge-readout", ok, opt)["status"] == "OK");
  const json bad = json::parse(R"({"charge": {"gamma": 5.0, "delta_gamma": 6.0}})");
  CHECK_THROWS_AS(validate_scenario("charge-readout", bad, opt), ParameterError);
  const json typo = json::parse(R"({"charge": {"gamma": "five"}})");
  CHECK_THROWS_AS(validate_scenario("charge-readout", typo, opt), ConfigError);
  const json huge = json::parse(R"({"run": {"max_n": 15000, "streaming": "off", "memory_cap_mb": 100}})");
  CHECK_THROWS_AS(validate_scenario("spin-readout", huge, opt), ResourceError);
  const json over = json::parse(R"({"run": {"max_n": 30000}})");
  CHECK_THROWS_AS(validate_scenario("charge-readout", over, opt), ResourceError);
  CHECK_THROWS_AS(validate_scenario("unknown", ok, opt), ConfigError);
}

TEST_CASE("options round-trip through JSON") {
  RunOptions o;
  o.threads = 3;
  o.seed = 17;
  o.max_n = 99;
  o.streaming = false;
  o.grid = "log:1:10:3";
  const RunOptions back = options_from_json(options_to_json(o), RunOptions{});
  CHECK(back.threads == 3);
  CHECK(back.seed == o.seed);
  CHECK(back.max_n == o.max_n);
  CHECK(back.streaming == o.streaming);
  CHECK(back.grid == o.grid);
}
