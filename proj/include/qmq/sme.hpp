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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qmq/linalg.hpp"
#include "qmq/models.hpp"

namespace qmq {

// Point-contact parameters matched to a QMQ charge readout. The jump operator
// is T + chi n_R with real T and chi.
struct SmeParams {
  double d_rate = 0.0;        // D = p_L / dtau, 1/ns
  double d_prime_rate = 0.0;  // D' = p_R / dtau, 1/ns
  double t_amp = 0.0;         // T = sqrt(D)
  double chi = 0.0;           // -(dgamma/hbar) sqrt(2 dtau), the linearized amplitude
  double chi_consistent = 0.0;  // (D' - D) / (2 T), to first order in dgamma
  double delta_tau = 0.0;
  ChargeQubitParams qubit;
  std::vector<std::string> warnings;
};

SmeParams match_parameters(const ChargeQubitParams& qubit, double delta_tau);

using QubitState = std::array<cplx, 2>;  // amplitudes on {|L>, |R>}

struct Trajectory {
  std::vector<double> times;
  std::vector<QubitState> states;
  std::vector<double> jump_times;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// dt must satisfy dt <= 0.01 / max(D, D', (T+chi)^2); otherwise DomainError.
double max_sme_timestep(const SmeParams& p);

// First-order jump unraveling. Each step applies exp(-i H dt / hbar), then with
// probability P_tr dt, P_tr = <J^dag J>, the jump |psi> <- J|psi>, else the
// no-jump map 1 - dt (J^dag J - P_tr)/2; the state is renormalized every step.
// States are recorded every record_every steps (and at t = 0).
Trajectory simulate_trajectory(const SmeParams& p, const QubitState& psi0, double dt, double duration,
                               std::uint64_t seed, std::uint64_t stream = 0, std::size_t record_every = 1);

// Trajectories 0..n-1 use streams 0..n-1 of the seed. states[traj][sample].
struct Ensemble {
  std::vector<double> times;
  std::vector<std::vector<QubitState>> states;
  std::vector<std::vector<std::size_t>> cumulative_jumps;  // [traj][sample]
};

Ensemble simulate_ensemble(const SmeParams& p, const QubitState& psi0, double dt, double duration,
                           std::size_t record_every, std::size_t trajectories, std::uint64_t seed);

// Trajectory average of |psi><psi| at sample s.
ComplexMatrix ensemble_density(const Ensemble& ensemble, std::size_t sample);

// Sample mean and standard error of <psi|O|psi> at every sample.
struct ObservableSeries {
  std::vector<double> mean;
  std::vector<double> standard_error;
};

ObservableSeries ensemble_observable(const Ensemble& ensemble, const ComplexMatrix& observable);

struct RateComparison {
  std::string name;
  double sme = 0.0;
  double qmq = 0.0;
  double ratio = 0.0;
  bool qmq_valid = true;
};

// Gamma_m, Gamma_d and Gamma_rel from both descriptions:
//   SME:  Gamma_m = Gamma_d = chi^2 / 2,  Gamma_rel = 4 t^2 Gd / ((hbar Gd)^2 + (2 eps)^2)
//   QMQ:  measurement_rate, dephasing_rate and relaxation_rate_charge.
std::vector<RateComparison> compare_rates(const ChargeQubitParams& qubit, double delta_tau);

}  // namespace qmq
