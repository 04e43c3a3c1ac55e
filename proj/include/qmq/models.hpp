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
#include <optional>
#include <cstddef>
#include <string>
#include <vector>

#include "qmq/linalg.hpp"

namespace qmq {

// Two-level charge qubit in {|L>, |R>}; 2*epsilon is the on-site detuning.
struct ChargeQubitParams {
  double epsilon = 10.0;
  double t = 0.0;
  double gamma = 5.0;
  double delta_gamma = 0.5;

  // Throws ParameterError unless gamma > 0 and 0 <= delta_gamma < gamma.
  void validate() const;
};

// Two-electron double dot (Hubbard) with a sensor coupling (Delta_x, Delta_y, Delta_z)
// acting on the right-dot spin.
struct SpinQubitParams {
  double epsilon = 1040.0;
  double t = 0.0;
  double U = 1000.0;
  double z_l = 11.0;
  double z_r = 9.0;
  double gamma = 5.0;
  double delta_gamma = 0.5;
  std::array<double, 3> delta{0.0, 0.0, 0.0};

  double delta_zeeman() const { return z_l - z_r; }

  // Throws ParameterError on hard violations, returns soft warnings.
  std::vector<std::string> validate() const;
};

namespace charge {
inline constexpr std::size_t kLeft = 0;
inline constexpr std::size_t kRight = 1;
}  // namespace charge

// Fixed two-electron basis order.
namespace spin {
inline constexpr std::size_t kS20 = 0;
inline constexpr std::size_t kS02 = 1;
inline constexpr std::size_t kUpDown = 2;  // left up, right down
inline constexpr std::size_t kUpUp = 3;
inline constexpr std::size_t kDownDown = 4;
inline constexpr std::size_t kDownUp = 5;
inline constexpr std::size_t kDim = 6;
}  // namespace spin

// Meter basis {|B>, |T>}; the meter is always the last tensor factor.
inline constexpr std::size_t kMeterBlocked = 0;
inline constexpr std::size_t kMeterTransmitted = 1;

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

ComplexMatrix charge_system_hamiltonian(const ChargeQubitParams& p);
// System operator multiplying tau_x in the interaction: -delta_gamma |R><R|.
ComplexMatrix charge_interaction_operator(const ChargeQubitParams& p);
// eps sz(x)I + t sx(x)I + gamma I(x)tx - dgamma |R><R|(x)tx over {LB, LT, RB, RT}.
ComplexMatrix build_charge_total_hamiltonian(const ChargeQubitParams& p);

ComplexMatrix spin_system_hamiltonian(const SpinQubitParams& p);
// Right-dot spin Paulis restricted to the (1,1) sector; zero on the singlets.
std::array<ComplexMatrix, 3> right_spin_operators();
// -(dgamma |S02><S02| + Delta . s_R).
ComplexMatrix spin_interaction_operator(const SpinQubitParams& p);
ComplexMatrix build_spin_total_hamiltonian(const SpinQubitParams& p);

// H_sys (x) I + gamma I (x) tau_x + V (x) tau_x.
ComplexMatrix assemble_total_hamiltonian(const ComplexMatrix& system, double gamma, const ComplexMatrix& interaction);

// hbar*pi / (4 (gamma - (delta_gamma - delta_z)/2)). Throws DomainError if the
// denominator is not positive.
double calibrate_timestep(double gamma, double delta_gamma, double delta_z = 0.0);

struct ModelCurrents {
  double mean_current;             // A, e / (2 dtau)
  double current_contrast;         // A, (e/dtau)(sin^2(gamma dtau/hbar) - sin^2((gamma-dgamma) dtau/hbar))
  double current_contrast_linear;  // A, dgamma e / hbar
};

ModelCurrents model_currents(double delta_tau, double gamma, double delta_gamma);

std::string spin_state_label(std::size_t index);

enum class ModelKind { kCharge, kSpin };

// Everything the engine and the benchmarks need about one readout scenario.
struct ReadoutModel {
  ModelKind kind = ModelKind::kCharge;
  ComplexMatrix system_hamiltonian;
  ComplexMatrix total_hamiltonian;
  double delta_tau = 0.0;
  std::size_t system_dim = 0;
  std::vector<std::string> labels;
  std::vector<cplx> e_state;  // charge: excited eigenstate; spin: S(0,2)
  std::vector<cplx> g_state;  // charge: ground eigenstate; spin: down-down
  ComplexMatrix leak_projector;  // zero for the charge model
  std::vector<std::string> warnings;
};

// delta_tau defaults to calibrate_timestep(gamma, delta_gamma, 0).
ReadoutModel make_charge_model(const ChargeQubitParams& p, std::optional<double> delta_tau = std::nullopt);
// delta_tau defaults to calibrate_timestep(gamma, delta_gamma, Delta_z).
ReadoutModel make_spin_model(const SpinQubitParams& p, std::optional<double> delta_tau = std::nullopt);

// 1 - |down-down><down-down| - |S(0,2)><S(0,2)|
ComplexMatrix spin_leak_projector();

}  // namespace qmq
