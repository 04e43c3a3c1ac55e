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
#include <string>
#include <vector>

#include "qmq/engine.hpp"
#include "qmq/linalg.hpp"
#include "qmq/models.hpp"

namespace qmq {

// 1 - (Tr M_e[|e><e|] + Tr M_g[|g><g|]) / 2 for transfer matrices upsilon_e, upsilon_g.
double infidelity(const ComplexMatrix& upsilon_e, const ComplexMatrix& upsilon_g, const std::vector<cplx>& e_state,
                  const std::vector<cplx>& g_state);

// M_r[rho] / Tr M_r[rho]. Throws UndefinedConditionalError if the trace is below 1e-15.
ComplexMatrix post_measurement_state(const ComplexMatrix& upsilon_r, const ComplexMatrix& rho_pre);
// Same, for an already evaluated unnormalized state.
ComplexMatrix normalize_conditional(const ComplexMatrix& unnormalized);

// 1 - Tr rho_post^2
double mixedness(const ComplexMatrix& upsilon_r, const ComplexMatrix& rho_pre);

// Tr(P_leak (M_g + M_e)[rho_pre]). Throws DomainError if P_leak is not a Hermitian projector.
double leakage(const ComplexMatrix& upsilon_g, const ComplexMatrix& upsilon_e, const ComplexMatrix& rho_pre,
               const ComplexMatrix& leak_projector);

// Benchmarks at each N of a grid, from one count-resolved pass with probes
// |e><e| and |g><g|. Mixedness uses rho_pre = (|e><e| + |g><g|)/2, leakage uses
// rho_pre = |g><g|, the population difference is <e|rho|e> - <g|rho|g> of the
// unconditional state started in |e>.
struct BenchmarkSeries {
  std::vector<std::size_t> steps;
  std::vector<double> integration_times;
  std::vector<double> infidelity;
  std::vector<double> eps_up;    // P(infer g | e)
  std::vector<double> eps_down;  // P(infer e | g)
  std::vector<double> mixedness_e;
  std::vector<double> mixedness_g;
  std::vector<double> leakage;
  std::vector<double> population_difference;
  std::vector<double> k_critical;
  std::vector<double> trace_drift;
  std::vector<std::string> warnings;
};

BenchmarkSeries benchmark_series(const ReadoutModel& model, const std::vector<std::size_t>& grid,
                                 std::size_t max_steps = kDefaultMaxSteps);

// Same series from the full count-resolved transfer matrices (d^2 probes),
// evaluated through the channel-level functions above. Agrees with
// benchmark_series to rounding; costs d^2/2 times more.
BenchmarkSeries benchmark_series_full(const ReadoutModel& model, const std::vector<std::size_t>& grid,
                                      std::size_t max_steps = kDefaultMaxSteps);

// Every step from 1 to n_max.
std::vector<std::size_t> dense_grid(std::size_t n_max);
// count points, logarithmic in N over [n_min, n_max], deduplicated after rounding.
std::vector<std::size_t> log_grid(std::size_t n_min, std::size_t n_max, std::size_t count);

struct FitResult {
  double rate = 0.0;
  double intercept = 0.0;  // log-amplitude for decay fits, unused for measurement fits
  double residual = 0.0;   // RMS residual of the fitted quantity
  std::size_t samples = 0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool converged = true;
};

// Least squares on log(values) = intercept - rate * t. Needs >= 5 samples, values > 0.
FitResult fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values);

// Iterates fit_decay_rate on the window t in [0.2/rate, 2/rate] until the rate settles.
// Falls back to the widest available window (converged = false) when fewer than 5 samples
// fall inside.
FitResult fit_decay_rate_windowed(const std::vector<double>& times, const std::vector<double>& values);

// One-parameter least squares of 1 - Phi(sqrt(2 rate t)) to the series.
FitResult fit_measurement_rate(const std::vector<double>& times, const std::vector<double>& infidelities);

struct FittedRates {
  double gamma_m = 0.0;
  double gamma_rel = 0.0;
  double gamma_leak = 0.0;
  std::vector<double> fit_residuals;
};

}  // namespace qmq
