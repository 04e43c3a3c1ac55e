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

#include "qmq/sme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmq/analytics.hpp"
#include "qmq/constants.hpp"
#include "qmq/errors.hpp"
#include "qmq/random.hpp"

namespace qmq {

SmeParams match_parameters(const ChargeQubitParams& qubit, double delta_tau) {
  qubit.validate();
  if (!(delta_tau > 0.0)) throw ParameterError("delta_tau must be positive");
  SmeParams p;
  p.qubit = qubit;
  p.delta_tau = delta_tau;
  const double p_l = std::pow(std::sin(qubit.gamma * delta_tau / kHbar), 2);
  const double p_r = std::pow(std::sin((qubit.gamma - qubit.delta_gamma) * delta_tau / kHbar), 2);
  p.d_rate = p_l / delta_tau;
  p.d_prime_rate = p_r / delta_tau;
  p.t_amp = std::sqrt(p.d_rate);
  p.chi = -(qubit.delta_gamma / kHbar) * std::sqrt(2.0 * delta_tau);
  p.chi_consistent = p.t_amp > 0.0 ? (p.d_prime_rate - p.d_rate) / (2.0 * p.t_amp) : 0.0;
  if (std::abs(p.chi) > 0.2 * p.t_amp) {
    p.warnings.push_back("|chi| exceeds 0.2 T; the linearized point-contact picture is questionable");
  }
  return p;
}

double max_sme_timestep(const SmeParams& p) {
  const double jumped = std::pow(p.t_amp + p.chi, 2);
  const double top = std::max({p.d_rate, p.d_prime_rate, jumped});
  return top > 0.0 ? 0.01 / top : std::numeric_limits<double>::infinity();
}

namespace {

struct Stepper {
  cplx u00, u01, u10, u11;  // exp(-i H dt / hbar)
  double jl, jr;            // diagonal of J = T + chi n_R
  double dt;
};

Stepper make_stepper(const SmeParams& p, double dt) {
  ComplexMatrix h{{p.qubit.epsilon, p.qubit.t}, {p.qubit.t, -p.qubit.epsilon}};
  const ComplexMatrix u = hermitian_propagator(h, dt);
  return {u(0, 0), u(0, 1), u(1, 0), u(1, 1), p.t_amp, p.t_amp + p.chi, dt};
}

void normalize(QubitState& psi) {
  const double n = std::sqrt(std::norm(psi[0]) + std::norm(psi[1]));
  psi[0] /= n;
  psi[1] /= n;
}

// Returns true on a jump.
bool step(const Stepper& s, QubitState& psi, double u) {
  const cplx a = s.u00 * psi[0] + s.u01 * psi[1];
  const cplx b = s.u10 * psi[0] + s.u11 * psi[1];
  const double ql = s.jl * s.jl;
  const double qr = s.jr * s.jr;
  const double p_tr = ql * std::norm(a) + qr * std::norm(b);
  if (u < p_tr * s.dt) {
    psi = {s.jl * a, s.jr * b};
    normalize(psi);
    return true;
  }
  psi = {a * (1.0 - 0.5 * s.dt * (ql - p_tr)), b * (1.0 - 0.5 * s.dt * (qr - p_tr))};
  normalize(psi);
  return false;
}

std::size_t step_count(double dt, double duration) {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

void check_timestep(const SmeParams& p, double dt, double duration) {
  if (!(dt > 0.0) || !(duration >= 0.0)) throw DomainError("dt must be positive and duration non-negative");
  const double cap = max_sme_timestep(p);
  if (dt > cap * (1.0 + 1e-12)) {
    throw DomainError("dt = " + std::to_string(dt) + " ns exceeds 0.01/max(D, D') = " + std::to_string(cap) + " ns");
  }
}

}  // namespace

Trajectory simulate_trajectory(const SmeParams& p, const QubitState& psi0, double dt, double duration,
                               std::uint64_t seed, std::uint64_t stream, std::size_t record_every) {
  check_timestep(p, dt, duration);
  if (record_every == 0) record_every = 1;
  const Stepper s = make_stepper(p, dt);
  PhiloxStream rng(seed, stream);
  Trajectory traj;
  traj.seed = seed;
  traj.stream = stream;
  QubitState psi = psi0;
  normalize(psi);
  traj.times.push_back(0.0);
  traj.states.push_back(psi);
  const std::size_t n = step_count(dt, duration);
  for (std::size_t i = 1; i <= n; ++i) {
    if (step(s, psi, rng.uniform())) traj.jump_times.push_back(static_cast<double>(i) * dt);
    if (i % record_every == 0) {
      traj.times.push_back(static_cast<double>(i) * dt);
      traj.states.push_back(psi);
    }
  }
  return traj;
}

Ensemble simulate_ensemble(const SmeParams& p, const QubitState& psi0, double dt, double duration,
                           std::size_t record_every, std::size_t trajectories, std::uint64_t seed) {
  check_timestep(p, dt, duration);
  if (record_every == 0) record_every = 1;
  const Stepper s = make_stepper(p, dt);
  const std::size_t n = step_count(dt, duration);
  Ensemble ens;
  for (std::size_t i = 0; i <= n; i += record_every) ens.times.push_back(static_cast<double>(i) * dt);
  const std::size_t samples = ens.times.size();
  ens.states.assign(trajectories, std::vector<QubitState>(samples));
  ens.cumulative_jumps.assign(trajectories, std::vector<std::size_t>(samples, 0));
  QubitState start = psi0;
  normalize(start);

  const long count = static_cast<long>(trajectories);
#pragma omp parallel for schedule(dynamic, 8)
  for (long tr = 0; tr < count; ++tr) {
    PhiloxStream rng(seed, static_cast<std::uint64_t>(tr));
    QubitState psi = start;
    auto& out = ens.states[tr];
    auto& jumps_out = ens.cumulative_jumps[tr];
    out[0] = psi;
    std::size_t jumps = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      if (step(s, psi, rng.uniform())) ++jumps;
      if (i % record_every == 0) {
        out[i / record_every] = psi;
        jumps_out[i / record_every] = jumps;
      }
    }
  }
  return ens;
}

ComplexMatrix ensemble_density(const Ensemble& ensemble, std::size_t sample) {
  ComplexMatrix rho = ComplexMatrix::zeros(2, 2);
  for (const auto& traj : ensemble.states) {
    const QubitState& psi = traj.at(sample);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) rho(i, j) += psi[i] * std::conj(psi[j]);
  }
  if (!ensemble.states.empty()) rho *= cplx(1.0 / static_cast<double>(ensemble.states.size()), 0.0);
  return rho;
}

ObservableSeries ensemble_observable(const Ensemble& ensemble, const ComplexMatrix& observable) {
  ObservableSeries out;
  const std::size_t n = ensemble.states.size();
  const std::size_t samples = ensemble.times.size();
  out.mean.assign(samples, 0.0);
  out.standard_error.assign(samples, 0.0);
  if (n == 0) return out;
  for (std::size_t s = 0; s < samples; ++s) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& traj : ensemble.states) {
      const QubitState& psi = traj[s];
      double v = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) v += std::real(std::conj(psi[i]) * observable(i, j) * psi[j]);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    out.mean[s] = mean;
    if (n > 1) {
      const double var = std::max(0.0, (sum2 - n * mean * mean) / static_cast<double>(n - 1));
      out.standard_error[s] = std::sqrt(var / static_cast<double>(n));
    }
  }
  return out;
}

std::vector<RateComparison> compare_rates(const ChargeQubitParams& qubit, double delta_tau) {
  const SmeParams p = match_parameters(qubit, delta_tau);
  const double g_sme = 0.5 * p.chi * p.chi;

  const MeasurementRate gm = measurement_rate(qubit.delta_gamma, delta_tau);
  const double dp = transmission_contrast(qubit.gamma, qubit.delta_gamma, delta_tau);
  const DephasingRate gd = dephasing_rate(dp, delta_tau);

  const double hg = kHbar * g_sme;
  const double rel_sme = 4.0 * qubit.t * qubit.t * g_sme / (hg * hg + 4.0 * qubit.epsilon * qubit.epsilon);
  const RatePrediction rel_qmq = relaxation_rate_charge(qubit.t, qubit.delta_gamma, qubit.epsilon, delta_tau);

  auto row = [](std::string name, double sme, double qmq, bool valid) {
    RateComparison r;
    r.name = std::move(name);
    r.sme = sme;
    r.qmq = qmq;
    r.ratio = qmq > 0.0 ? sme / qmq : std::numeric_limits<double>::quiet_NaN();
    r.qmq_valid = valid;
    return r;
  };
  return {row("gamma_m", g_sme, gm.leading.value, gm.leading.valid),
          row("gamma_d", g_sme, gd.exact.value, gd.exact.valid),
          row("gamma_rel", rel_sme, rel_qmq.value, rel_qmq.valid)};
}

}  // namespace qmq
