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
#include <string>
#include <vector>

#include "qmq/engine.hpp"
#include "qmq/linalg.hpp"
#include "qmq/models.hpp"

namespace qmq {

// First-order error model of the two-round leakage-detection experiment.
// eps_up: a (1,1) state is read as S(0,2); eps_down: S(0,2) is read as (1,1).
// q1, q2: the prepared down-up state is actually down-down / up-down.
struct ErrorBudget {
  double leakage_L = 0.0;
  double eps_up = 0.0;
  double eps_down = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;

  // Throws ParameterError outside [0, 1]; warns above 0.2.
  std::vector<std::string> validate() const;
};

// Outcome 1 means S(0,2) was inferred. p0_du and p0_ud are the auxiliary
// single-measurement probabilities of the first-order model for the
// preparations down-up and up-down.
struct ExperimentProbabilities {
  double p00 = 1.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;
  double p0_du = 0.0;
  double p0_ud = 0.0;
};

ExperimentProbabilities experiment_probabilities(const ErrorBudget& b);

struct BudgetEstimate {
  ErrorBudget budget;
  std::vector<std::string> clipped;  // names of parameters clipped to 0
};

// Exact inverse of experiment_probabilities, negative estimates clipped to 0.
BudgetEstimate estimate_error_budget(const ExperimentProbabilities& observed);

// Operation-point to readout-point relabelling of the ideal spin-to-charge
// conversion: up-up, down-down and S(2,0) stay, up-down -> down-up,
// down-up -> S(0,2), S(0,2) -> up-down.
ComplexMatrix spin_to_charge_map();
ComplexMatrix charge_to_spin_map();
// X on both spins: up-up <-> down-down, up-down <-> down-up, singlets fixed.
ComplexMatrix xx_gate();
// X on the right spin only, used to prepare down-down from down-up.
ComplexMatrix x_right_gate();

// (1 - q1 - q2)|du><du| + q1 |dd><dd| + q2 |ud><ud| at the operation point.
ComplexMatrix prepared_down_up(double q1, double q2);

struct LeakageExperimentConfig {
  std::size_t n_steps_per_round = 1000;
  std::size_t shots = 10000;
  std::uint64_t seed = 1;
  double q1 = 0.0;
  double q2 = 0.0;
};

struct LeakageExperimentResult {
  std::size_t shots = 0;
  std::size_t n_steps_per_round = 0;
  double integration_time = 0.0;  // ns per round
  std::size_t counts[2][2] = {{0, 0}, {0, 0}};
  ExperimentProbabilities observed;
  BudgetEstimate estimate;
  double true_leakage = 0.0;             // Tr(P_leak M[rho]) after round one
  double leakage_standard_error = 0.0;   // of p01 - p10
  double p1_given_s02 = 0.0;             // 1 - eps_down of the rule in use
  double p1_given_dd = 0.0;              // eps_up of the rule in use
  InferenceRule rule;
  std::vector<std::string> warnings;
};

// Everything the shots share: per-count round-one probabilities, round-two
// outcome-1 probabilities and the auxiliary single-round probabilities.
struct PreparedLeakageExperiment {
  std::size_t n_steps_per_round = 0;
  double integration_time = 0.0;
  std::vector<double> cumulative;      // running sum of P(N_t = k) in round one
  std::vector<double> second_round;    // P(outcome 1 in round two | N_t = k)
  double p1_down_up = 0.0;
  double p1_up_down = 0.0;
  double true_leakage = 0.0;
  double p1_given_s02 = 0.0;
  double p1_given_dd = 0.0;
  InferenceRule rule;
  std::vector<std::string> warnings;
};

PreparedLeakageExperiment prepare_leakage_experiment(const SpinQubitParams& params, std::size_t n_steps_per_round,
                                                     double q1 = 0.0, double q2 = 0.0);

// Shot s uses stream s of the seed.
LeakageExperimentResult sample_leakage_experiment(const PreparedLeakageExperiment& prepared, std::size_t shots,
                                                  std::uint64_t seed);

// Two readout rounds per shot with the count-resolved engine. Round one samples
// N_t from the distribution of the prepared state, conditions on it and
// binarizes with the maximum-likelihood rule for S(0,2) against down-down; the
// state is converted back, flipped by X (x) X, converted again and read once
// more. The auxiliary frequencies come from single rounds on the down-up and
// up-down preparations; p0_ud is reported as the probability of outcome 1 for
// up-down, which is the quantity the first-order model assigns to it.
LeakageExperimentResult simulate_leakage_experiment(const SpinQubitParams& params,
                                                    const LeakageExperimentConfig& config);

}  // namespace qmq
