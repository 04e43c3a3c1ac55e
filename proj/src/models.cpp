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

#include "qmq/models.hpp"

#include <cmath>
#include <sstream>

#include "qmq/constants.hpp"
#include "qmq/errors.hpp"

namespace qmq {

void ChargeQubitParams::validate() const {
  if (!(gamma > 0.0)) throw ParameterError("charge qubit: gamma must be positive");
  if (!(delta_gamma >= 0.0)) throw ParameterError("charge qubit: delta_gamma must be non-negative");
  if (!(delta_gamma < gamma)) throw ParameterError("charge qubit: delta_gamma must be smaller than gamma (weak measurement)");
  if (!std::isfinite(epsilon) || !std::isfinite(t)) throw ParameterError("charge qubit: epsilon and t must be finite");
}

std::vector<std::string> SpinQubitParams::validate() const {
  if (!(U > 0.0)) throw ParameterError("spin qubit: U must be positive");
  if (!(gamma > 0.0)) throw ParameterError("spin qubit: gamma must be positive");
  if (!(delta_gamma >= 0.0)) throw ParameterError("spin qubit: delta_gamma must be non-negative");
  if (!(delta_gamma < gamma)) throw ParameterError("spin qubit: delta_gamma must be smaller than gamma (weak measurement)");
  if (t != 0.0 && z_l == z_r) throw ParameterError("spin qubit: Z_L must differ from Z_R when t != 0");
  std::vector<std::string> warnings;
  const double norm = std::sqrt(delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2]);
  if (norm > 0.1 * gamma) {
    std::ostringstream os;
    os << "|Delta| = " << norm << " ueV is not small compared with gamma = " << gamma << " ueV";
    warnings.push_back(os.str());
  }
  return warnings;
}

ComplexMatrix pauli_x() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix pauli_y() { return ComplexMatrix{{0.0, cplx{0.0, -1.0}}, {cplx{0.0, 1.0}, 0.0}}; }
ComplexMatrix pauli_z() { return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}; }

ComplexMatrix charge_system_hamiltonian(const ChargeQubitParams& p) {
  return cplx{p.epsilon} * pauli_z() + cplx{p.t} * pauli_x();
}

ComplexMatrix charge_interaction_operator(const ChargeQubitParams& p) {
  return cplx{-p.delta_gamma} * projector(2, charge::kRight);
}

ComplexMatrix assemble_total_hamiltonian(const ComplexMatrix& system, double gamma, const ComplexMatrix& interaction) {
  const std::size_t d = system.rows();
  const ComplexMatrix tx = pauli_x();
  ComplexMatrix h = kron(system, ComplexMatrix::identity(2));
  h += cplx{gamma} * kron(ComplexMatrix::identity(d), tx);
  h += kron(interaction, tx);
  return h;
}

ComplexMatrix build_charge_total_hamiltonian(const ChargeQubitParams& p) {
  return assemble_total_hamiltonian(charge_system_hamiltonian(p), p.gamma, charge_interaction_operator(p));
}

ComplexMatrix spin_system_hamiltonian(const SpinQubitParams& p) {
  using namespace spin;
  ComplexMatrix h(kDim, kDim);
  // on-site (eps/2)(n_L - n_R) plus Coulomb U on doubly occupied dots
  h(kS20, kS20) = p.epsilon + p.U;
  h(kS02, kS02) = -p.epsilon + p.U;
  // Zeeman (Z_L/2)(n_Lup - n_Ldown) + (Z_R/2)(n_Rup - n_Rdown)
  h(kUpDown, kUpDown) = 0.5 * (p.z_l - p.z_r);
  h(kUpUp, kUpUp) = 0.5 * (p.z_l + p.z_r);
  h(kDownDown, kDownDown) = -0.5 * (p.z_l + p.z_r);
  h(kDownUp, kDownUp) = 0.5 * (p.z_r - p.z_l);
  // t sum_s (a^dag_Rs a_Ls + h.c.) with S(0,2) = a^dag_Rup a^dag_Rdown |0>,
  // S(2,0) = a^dag_Lup a^dag_Ldown |0>, up-down = a^dag_Lup a^dag_Rdown |0>.
  h(kS02, kUpDown) = h(kUpDown, kS02) = p.t;
  h(kS02, kDownUp) = h(kDownUp, kS02) = -p.t;
  h(kS20, kUpDown) = h(kUpDown, kS20) = p.t;
  h(kS20, kDownUp) = h(kDownUp, kS20) = -p.t;
  return h;
}

std::array<ComplexMatrix, 3> right_spin_operators() {
  using namespace spin;
  ComplexMatrix sx(kDim, kDim);
  ComplexMatrix sy(kDim, kDim);
  ComplexMatrix sz(kDim, kDim);
  // pairs (right up, right down) sharing the left spin
  const std::size_t pairs[2][2] = {{kUpUp, kUpDown}, {kDownUp, kDownDown}};
  for (const auto& pr : pairs) {
    const std::size_t up = pr[0];
    const std::size_t dn = pr[1];
    sx(up, dn) = sx(dn, up) = 1.0;
    sy(up, dn) = cplx{0.0, -1.0};
    sy(dn, up) = cplx{0.0, 1.0};
    sz(up, up) = 1.0;
    sz(dn, dn) = -1.0;
  }
  return {sx, sy, sz};
}

ComplexMatrix spin_interaction_operator(const SpinQubitParams& p) {
  const auto s = right_spin_operators();
  ComplexMatrix v = cplx{p.delta_gamma} * projector(spin::kDim, spin::kS02);
  for (int a = 0; a < 3; ++a) v += cplx{p.delta[a]} * s[a];
  v *= -1.0;
  return v;
}

ComplexMatrix build_spin_total_hamiltonian(const SpinQubitParams& p) {
  return assemble_total_hamiltonian(spin_system_hamiltonian(p), p.gamma, spin_interaction_operator(p));
}

double calibrate_timestep(double gamma, double delta_gamma, double delta_z) {
  const double denom = 4.0 * (gamma - 0.5 * (delta_gamma - delta_z));
  if (!(denom > 0.0)) throw DomainError("calibrate_timestep: non-positive denominator");
  return kHbar * kPi / denom;
}

ModelCurrents model_currents(double delta_tau, double gamma, double delta_gamma) {
  if (!(delta_tau > 0.0)) throw DomainError("model_currents: delta_tau must be positive");
  const double dt_s = delta_tau * 1e-9;
  const double se = std::sin(gamma * delta_tau / kHbar);
  const double sg = std::sin((gamma - delta_gamma) * delta_tau / kHbar);
  ModelCurrents c{};
  c.mean_current = kElementaryCharge / (2.0 * dt_s);
  c.current_contrast = kElementaryCharge / dt_s * (se * se - sg * sg);
  c.current_contrast_linear = delta_gamma * kElementaryCharge / (kHbar * 1e-9);
  return c;
}

std::string spin_state_label(std::size_t index) {
  static const char* labels[] = {"S(2,0)", "S(0,2)", "up-down", "up-up", "down-down", "down-up"};
  if (index >= spin::kDim) throw DomainError("spin_state_label: index out of range");
  return labels[index];
}

ReadoutModel make_charge_model(const ChargeQubitParams& p, std::optional<double> delta_tau) {
  p.validate();
  ReadoutModel m;
  m.kind = ModelKind::kCharge;
  m.system_hamiltonian = charge_system_hamiltonian(p);
  m.total_hamiltonian = build_charge_total_hamiltonian(p);
  m.delta_tau = delta_tau ? *delta_tau : calibrate_timestep(p.gamma, p.delta_gamma, 0.0);
  m.system_dim = 2;
  m.labels = {"L", "R"};
  const HermitianEigen eig = hermitian_eigen(m.system_hamiltonian);
  m.g_state = {eig.vectors(0, 0), eig.vectors(1, 0)};
  m.e_state = {eig.vectors(0, 1), eig.vectors(1, 1)};
  m.leak_projector = ComplexMatrix(2, 2);
  return m;
}

ComplexMatrix spin_leak_projector() {
  ComplexMatrix p = ComplexMatrix::identity(spin::kDim);
  p(spin::kDownDown, spin::kDownDown) = 0.0;
  p(spin::kS02, spin::kS02) = 0.0;
  return p;
}

ReadoutModel make_spin_model(const SpinQubitParams& p, std::optional<double> delta_tau) {
  ReadoutModel m;
  m.warnings = p.validate();
  m.kind = ModelKind::kSpin;
  m.system_hamiltonian = spin_system_hamiltonian(p);
  m.total_hamiltonian = build_spin_total_hamiltonian(p);
  m.delta_tau = delta_tau ? *delta_tau : calibrate_timestep(p.gamma, p.delta_gamma, p.delta[2]);
  m.system_dim = spin::kDim;
  for (std::size_t i = 0; i < spin::kDim; ++i) m.labels.push_back(spin_state_label(i));
  m.e_state = basis_vector(spin::kDim, spin::kS02);
  m.g_state = basis_vector(spin::kDim, spin::kDownDown);
  m.leak_projector = spin_leak_projector();
  return m;
}

}  // namespace qmq
