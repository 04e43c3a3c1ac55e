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

#include "qmq/protocols.hpp"

#include <algorithm>
#include <cmath>

#include "qmq/errors.hpp"
#include "qmq/metrics.hpp"
#include "qmq/random.hpp"

namespace qmq {

std::vector<std::string> ErrorBudget::validate() const {
  std::vector<std::string> warnings;
  const std::pair<const char*, double> fields[] = {
      {"leakage_L", leakage_L}, {"eps_up", eps_up}, {"eps_down", eps_down}, {"q1", q1}, {"q2", q2}};
  for (const auto& [name, v] : fields) {
    if (!(v >= 0.0 && v <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0, 1]");
    if (v > 0.2) warnings.push_back(std::string(name) + " > 0.2; the first-order model is unreliable");
  }
  return warnings;
}

ExperimentProbabilities experiment_probabilities(const ErrorBudget& b) {
  b.validate();
  ExperimentProbabilities p;
  p.p01 = b.leakage_L + b.eps_up;
  p.p10 = b.eps_up;
  p.p11 = b.q1;
  p.p00 = 1.0 - p.p01 - p.p10 - p.p11;
  p.p0_du = b.eps_down + b.q1 + b.q2;
  p.p0_ud = b.eps_up + b.q2;
  return p;
}

BudgetEstimate estimate_error_budget(const ExperimentProbabilities& o) {
  BudgetEstimate est;
  auto clip = [&](const char* name, double v) {
    if (v < 0.0) {
      est.clipped.emplace_back(name);
      return 0.0;
    }
    return v;
  };
  ErrorBudget& b = est.budget;
  b.eps_up = clip("eps_up", o.p10);
  b.leakage_L = clip("leakage_L", o.p01 - o.p10);
  b.q1 = clip("q1", o.p11);
  b.q2 = clip("q2", o.p0_ud - o.p10);
  b.eps_down = clip("eps_down", o.p0_du - o.p11 - (o.p0_ud - o.p10));
  return est;
}

namespace {

ComplexMatrix permutation(const std::size_t (&image)[spin::kDim]) {
  ComplexMatrix p = ComplexMatrix::zeros(spin::kDim, spin::kDim);
  for (std::size_t j = 0; j < spin::kDim; ++j) p(image[j], j) = 1.0;
  return p;
}

ComplexMatrix conjugate_by(const ComplexMatrix& u, const ComplexMatrix& rho) { return u * rho * u.adjoint(); }

double real_trace(const ComplexMatrix& a) { return std::real(a.trace()); }

double trace_product(const ComplexMatrix& a, const ComplexMatrix& b) { return std::real((a * b).trace()); }

std::size_t sample_index(const std::vector<double>& cumulative, double u) {
  const double target = u * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

}  // namespace

ComplexMatrix spin_to_charge_map() {
  using namespace spin;
  std::size_t image[kDim];
  image[kS20] = kS20;
  image[kS02] = kUpDown;
  image[kUpDown] = kDownUp;
  image[kUpUp] = kUpUp;
  image[kDownDown] = kDownDown;
  image[kDownUp] = kS02;
  return permutation(image);
}

ComplexMatrix charge_to_spin_map() { return spin_to_charge_map().adjoint(); }

ComplexMatrix xx_gate() {
  using namespace spin;
  std::size_t image[kDim];
  image[kS20] = kS20;
  image[kS02] = kS02;
  image[kUpDown] = kDownUp;
  image[kDownUp] = kUpDown;
  image[kUpUp] = kDownDown;
  image[kDownDown] = kUpUp;
  return permutation(image);
}

ComplexMatrix x_right_gate() {
  using namespace spin;
  std::size_t image[kDim];
  image[kS20] = kS20;
  image[kS02] = kS02;
  image[kUpDown] = kUpUp;
  image[kUpUp] = kUpDown;
  image[kDownDown] = kDownUp;
  image[kDownUp] = kDownDown;
  return permutation(image);
}

ComplexMatrix prepared_down_up(double q1, double q2) {
  if (q1 < 0.0 || q2 < 0.0 || q1 + q2 > 1.0) throw ParameterError("q1, q2 must be non-negative with q1 + q2 <= 1");
  ComplexMatrix rho = ComplexMatrix::zeros(spin::kDim, spin::kDim);
  rho(spin::kDownUp, spin::kDownUp) = 1.0 - q1 - q2;
  rho(spin::kDownDown, spin::kDownDown) = q1;
  rho(spin::kUpDown, spin::kUpDown) = q2;
  return rho;
}

PreparedLeakageExperiment prepare_leakage_experiment(const SpinQubitParams& params, std::size_t n, double q1,
                                                     double q2) {
  if (n == 0) throw ParameterError("n_steps_per_round must be positive");
  const ReadoutModel model = make_spin_model(params);
  PreparedLeakageExperiment prep;
  prep.warnings = model.warnings;
  prep.n_steps_per_round = n;
  prep.integration_time = static_cast<double>(n) * model.delta_tau;

  const ComplexMatrix s2c = spin_to_charge_map();
  const ComplexMatrix c2s = charge_to_spin_map();
  const ComplexMatrix xx = xx_gate();
  const ComplexMatrix op_du = prepared_down_up(q1, q2);
  const ComplexMatrix op_dd = conjugate_by(x_right_gate(), op_du);
  const ComplexMatrix op_ud = conjugate_by(xx, op_du);
  const ComplexMatrix ro_dd = conjugate_by(s2c, op_dd);

  const StepOperators step = step_operators(model.total_hamiltonian, model.delta_tau);
  CountResolvedPropagator states(step, {projector(spin::kDim, spin::kS02), projector(spin::kDim, spin::kDownDown), ro_dd},
                                 n);
  states.advance_to(n);
  CountResolvedPropagator effects(step, {ComplexMatrix::identity(spin::kDim)}, n, Picture::kHeisenberg);
  effects.advance_to(n);

  const std::vector<double> dist_e = states.distribution(0);
  const std::vector<double> dist_g = states.distribution(1);
  prep.rule = critical_ratio(dist_e, dist_g);
  for (const auto& w : prep.rule.warnings) prep.warnings.push_back(w);
  const std::vector<bool> mask = prep.rule.e_mask();
  const ComplexMatrix effect_one = effects.aggregate(0, mask);
  for (std::size_t k = 0; k <= n; ++k) {
    if (mask[k]) {
      prep.p1_given_s02 += dist_e[k];
      prep.p1_given_dd += dist_g[k];
    }
  }
  prep.true_leakage = std::real((model.leak_projector * states.total(2)).trace());

  // back to the operation point, X on both spins, forward again
  const ComplexMatrix between = s2c * xx * c2s;
  prep.cumulative.assign(n + 1, 0.0);
  prep.second_round.assign(n + 1, 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const ComplexMatrix x = states.conditional(2, k);
    const double pk = std::max(0.0, real_trace(x));
    acc += pk;
    prep.cumulative[k] = acc;
    if (pk > 1e-300) {
      prep.second_round[k] = std::clamp(trace_product(effect_one, conjugate_by(between, x)) / pk, 0.0, 1.0);
    }
  }
  prep.p1_down_up = std::clamp(trace_product(effect_one, conjugate_by(s2c, op_du)), 0.0, 1.0);
  prep.p1_up_down = std::clamp(trace_product(effect_one, conjugate_by(s2c, op_ud)), 0.0, 1.0);
  return prep;
}

LeakageExperimentResult sample_leakage_experiment(const PreparedLeakageExperiment& prep, std::size_t shots,
                                                  std::uint64_t seed) {
  if (shots == 0) throw ParameterError("shots must be positive");
  LeakageExperimentResult res;
  res.warnings = prep.warnings;
  if (shots < 100) res.warnings.push_back("fewer than 100 shots; frequencies are statistically weak");
  res.shots = shots;
  res.n_steps_per_round = prep.n_steps_per_round;
  res.integration_time = prep.integration_time;
  res.true_leakage = prep.true_leakage;
  res.p1_given_s02 = prep.p1_given_s02;
  res.p1_given_dd = prep.p1_given_dd;
  res.rule = prep.rule;

  std::size_t aux_du0 = 0, aux_ud1 = 0;
  for (std::size_t shot = 0; shot < shots; ++shot) {
    PhiloxStream rng(seed, shot);
    const std::size_t k = sample_index(prep.cumulative, rng.uniform());
    const int first = prep.rule.infers_e(k) ? 1 : 0;
    const int last = rng.uniform() < prep.second_round[k] ? 1 : 0;
    ++res.counts[first][last];
    if (rng.uniform() >= prep.p1_down_up) ++aux_du0;
    if (rng.uniform() < prep.p1_up_down) ++aux_ud1;
  }

  const double s = static_cast<double>(shots);
  ExperimentProbabilities& o = res.observed;
  o.p00 = res.counts[0][0] / s;
  o.p01 = res.counts[0][1] / s;
  o.p10 = res.counts[1][0] / s;
  o.p11 = res.counts[1][1] / s;
  o.p0_du = aux_du0 / s;
  o.p0_ud = aux_ud1 / s;
  res.estimate = estimate_error_budget(o);
  const double diff = o.p01 - o.p10;
  res.leakage_standard_error = std::sqrt(std::max(0.0, o.p01 + o.p10 - diff * diff) / s);
  return res;
}

LeakageExperimentResult simulate_leakage_experiment(const SpinQubitParams& params,
                                                    const LeakageExperimentConfig& config) {
  const PreparedLeakageExperiment prep =
      prepare_leakage_experiment(params, config.n_steps_per_round, config.q1, config.q2);
  return sample_leakage_experiment(prep, config.shots, config.seed);
}

}  // namespace qmq
