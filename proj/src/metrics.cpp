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

#include "qmq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qmq/analytics.hpp"
#include "qmq/errors.hpp"

namespace qmq {

namespace {

double expectation(const ComplexMatrix& rho, const std::vector<cplx>& v) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) acc += std::conj(v[i]) * rho(i, j) * v[j];
  return acc.real();
}

double mixedness_of(const ComplexMatrix& unnormalized) {
  const ComplexMatrix rho = normalize_conditional(unnormalized);
  return 1.0 - purity(rho);
}

}  // namespace

double infidelity(const ComplexMatrix& upsilon_e, const ComplexMatrix& upsilon_g, const std::vector<cplx>& e_state,
                  const std::vector<cplx>& g_state) {
  const double pe = apply_superoperator(upsilon_e, outer(e_state)).trace().real();
  const double pg = apply_superoperator(upsilon_g, outer(g_state)).trace().real();
  return 1.0 - 0.5 * (pe + pg);
}

ComplexMatrix normalize_conditional(const ComplexMatrix& unnormalized) {
  const double tr = unnormalized.trace().real();
  if (!(tr > 1e-15)) throw UndefinedConditionalError("post-measurement state undefined: outcome probability vanishes");
  return cplx{1.0 / tr} * unnormalized;
}

ComplexMatrix post_measurement_state(const ComplexMatrix& upsilon_r, const ComplexMatrix& rho_pre) {
  return normalize_conditional(apply_superoperator(upsilon_r, rho_pre));
}

double mixedness(const ComplexMatrix& upsilon_r, const ComplexMatrix& rho_pre) {
  return 1.0 - purity(post_measurement_state(upsilon_r, rho_pre));
}

double leakage(const ComplexMatrix& upsilon_g, const ComplexMatrix& upsilon_e, const ComplexMatrix& rho_pre,
               const ComplexMatrix& leak_projector) {
  if (!is_hermitian(leak_projector, 1e-12) || max_abs_diff(leak_projector * leak_projector, leak_projector) > 1e-12) {
    throw DomainError("leakage: P_leak must be a Hermitian projector");
  }
  const ComplexMatrix out = apply_superoperator(upsilon_g + upsilon_e, rho_pre);
  return (leak_projector * out).trace().real();
}

std::vector<std::size_t> dense_grid(std::size_t n_max) {
  std::vector<std::size_t> grid(n_max);
  for (std::size_t i = 0; i < n_max; ++i) grid[i] = i + 1;
  return grid;
}

std::vector<std::size_t> log_grid(std::size_t n_min, std::size_t n_max, std::size_t count) {
  if (n_min < 1 || n_max < n_min || count < 1) throw DomainError("log_grid: need 1 <= n_min <= n_max and count >= 1");
  std::vector<std::size_t> grid;
  if (count == 1 || n_min == n_max) return {n_max};
  const double a = std::log(static_cast<double>(n_min));
  const double b = std::log(static_cast<double>(n_max));
  for (std::size_t i = 0; i < count; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    const auto n = static_cast<std::size_t>(std::llround(std::exp(x)));
    if (grid.empty() || n > grid.back()) grid.push_back(std::clamp(n, n_min, n_max));
  }
  return grid;
}

BenchmarkSeries benchmark_series(const ReadoutModel& model, const std::vector<std::size_t>& grid, std::size_t max_steps) {
  if (grid.empty()) throw DomainError("benchmark_series: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1 || (i > 0 && grid[i] <= grid[i - 1])) {
      throw DomainError("benchmark_series: grid must be strictly ascending and start at N >= 1");
    }
  }
  if (grid.back() > max_steps) {
    std::ostringstream os;
    os << "benchmark_series: N = " << grid.back() << " exceeds the cap of " << max_steps;
    throw ResourceError(os.str());
  }
  const StepOperators step = step_operators(model.total_hamiltonian, model.delta_tau);
  const ComplexMatrix ee = outer(model.e_state);
  const ComplexMatrix gg = outer(model.g_state);
  CountResolvedPropagator prop(step, {ee, gg}, max_steps);
  const bool has_leakage = model.leak_projector.frobenius_norm() > 0.0;

  BenchmarkSeries s;
  for (const std::size_t n : grid) {
    prop.advance_to(n);
    const std::vector<double> pe = prop.distribution(0);
    const std::vector<double> pg = prop.distribution(1);
    const InferenceRule rule = critical_ratio(pe, pg);
    for (const auto& w : rule.warnings) s.warnings.push_back(w);
    const std::vector<bool> e_mask = rule.e_mask();
    std::vector<bool> g_mask(e_mask.size());
    for (std::size_t k = 0; k < e_mask.size(); ++k) g_mask[k] = !e_mask[k];

    const ComplexMatrix e_from_e = prop.aggregate(0, e_mask);
    const ComplexMatrix g_from_e = prop.aggregate(0, g_mask);
    const ComplexMatrix e_from_g = prop.aggregate(1, e_mask);
    const ComplexMatrix g_from_g = prop.aggregate(1, g_mask);

    s.steps.push_back(n);
    s.integration_times.push_back(static_cast<double>(n) * model.delta_tau);
    const double p_ee = e_from_e.trace().real();
    const double p_gg = g_from_g.trace().real();
    s.infidelity.push_back(1.0 - 0.5 * (p_ee + p_gg));
    s.eps_up.push_back(g_from_e.trace().real());
    s.eps_down.push_back(e_from_g.trace().real());
    s.k_critical.push_back(rule.k_critical);

    const ComplexMatrix mixed_e = cplx{0.5} * (e_from_e + e_from_g);
    const ComplexMatrix mixed_g = cplx{0.5} * (g_from_e + g_from_g);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mixedness_e.push_back(mixed_e.trace().real() > 1e-15 ? mixedness_of(mixed_e) : nan);
    s.mixedness_g.push_back(mixed_g.trace().real() > 1e-15 ? mixedness_of(mixed_g) : nan);

    const ComplexMatrix total_e = e_from_e + g_from_e;
    const ComplexMatrix total_g = e_from_g + g_from_g;
    s.leakage.push_back(has_leakage ? (model.leak_projector * total_g).trace().real() : 0.0);
    s.population_difference.push_back(expectation(total_e, model.e_state) - expectation(total_e, model.g_state));
    s.trace_drift.push_back(std::max(std::abs(total_e.trace().real() - 1.0), std::abs(total_g.trace().real() - 1.0)));
  }
  return s;
}

BenchmarkSeries benchmark_series_full(const ReadoutModel& model, const std::vector<std::size_t>& grid,
                                      std::size_t max_steps) {
  if (grid.empty()) throw DomainError("benchmark_series_full: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1 || (i > 0 && grid[i] <= grid[i - 1])) {
      throw DomainError("benchmark_series_full: grid must be strictly ascending and start at N >= 1");
    }
  }
  if (grid.back() > max_steps) {
    std::ostringstream os;
    os << "benchmark_series_full: N = " << grid.back() << " exceeds the cap of " << max_steps;
    throw ResourceError(os.str());
  }
  const StepOperators step = step_operators(model.total_hamiltonian, model.delta_tau);
  CountResolvedPropagator prop(step, matrix_unit_probes(step.dim), max_steps);
  const ComplexMatrix ee = outer(model.e_state);
  const ComplexMatrix gg = outer(model.g_state);
  const ComplexMatrix mix = cplx{0.5} * (ee + gg);
  const bool has_leakage = model.leak_projector.frobenius_norm() > 0.0;

  BenchmarkSeries s;
  for (const std::size_t n : grid) {
    prop.advance_to(n);
    const CountResolvedChannels channels = channels_from_probes(prop);
    const InferenceRule rule =
        critical_ratio(outcome_distribution(channels, ee), outcome_distribution(channels, gg));
    for (const auto& w : rule.warnings) s.warnings.push_back(w);
    const MeasurementOperations ops = aggregate_operations(channels, rule);
    const ComplexMatrix sum = ops.upsilon_e + ops.upsilon_g;

    s.steps.push_back(n);
    s.integration_times.push_back(static_cast<double>(n) * model.delta_tau);
    s.infidelity.push_back(infidelity(ops.upsilon_e, ops.upsilon_g, model.e_state, model.g_state));
    s.eps_up.push_back(apply_superoperator(ops.upsilon_g, ee).trace().real());
    s.eps_down.push_back(apply_superoperator(ops.upsilon_e, gg).trace().real());
    s.k_critical.push_back(rule.k_critical);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const ComplexMatrix me = apply_superoperator(ops.upsilon_e, mix);
    const ComplexMatrix mg = apply_superoperator(ops.upsilon_g, mix);
    s.mixedness_e.push_back(me.trace().real() > 1e-15 ? mixedness_of(me) : nan);
    s.mixedness_g.push_back(mg.trace().real() > 1e-15 ? mixedness_of(mg) : nan);
    s.leakage.push_back(has_leakage ? leakage(ops.upsilon_g, ops.upsilon_e, gg, model.leak_projector) : 0.0);
    const ComplexMatrix total_e = apply_superoperator(sum, ee);
    const ComplexMatrix total_g = apply_superoperator(sum, gg);
    s.population_difference.push_back(expectation(total_e, model.e_state) - expectation(total_e, model.g_state));
    s.trace_drift.push_back(std::max(std::abs(total_e.trace().real() - 1.0), std::abs(total_g.trace().real() - 1.0)));
  }
  return s;
}

FitResult fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size()) throw FitError("fit_decay_rate: times and values differ in length");
  if (times.size() < 5) throw FitError("fit_decay_rate: at least 5 samples are required");
  const std::size_t n = times.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0)) throw FitError("fit_decay_rate: values must be positive");
    y[i] = std::log(values[i]);
  }
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += times[i];
    my += y[i];
  }
  mt /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (times[i] - mt) * (times[i] - mt);
    sty += (times[i] - mt) * (y[i] - my);
  }
  if (!(stt > 0.0)) throw FitError("fit_decay_rate: sample times are all equal");
  const double slope = sty / stt;
  FitResult r;
  r.rate = -slope;
  r.intercept = my - slope * mt;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double res = y[i] - (r.intercept + slope * times[i]);
    ss += res * res;
  }
  r.residual = std::sqrt(ss / static_cast<double>(n));
  r.samples = n;
  r.window_lo = *std::min_element(times.begin(), times.end());
  r.window_hi = *std::max_element(times.begin(), times.end());
  return r;
}

FitResult fit_decay_rate_windowed(const std::vector<double>& times, const std::vector<double>& values) {
  FitResult current = fit_decay_rate(times, values);
  for (int iter = 0; iter < 50; ++iter) {
    if (!(current.rate > 0.0)) break;
    const double lo = 0.2 / current.rate;
    const double hi = 2.0 / current.rate;
    std::vector<double> t;
    std::vector<double> v;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] >= lo && times[i] <= hi) {
        t.push_back(times[i]);
        v.push_back(values[i]);
      }
    }
    if (t.size() < 5) {
      current.converged = false;
      return current;
    }
    FitResult next = fit_decay_rate(t, v);
    const bool settled = std::abs(next.rate - current.rate) <= 1e-9 * std::abs(current.rate);
    current = next;
    current.window_lo = lo;
    current.window_hi = hi;
    if (settled) return current;
  }
  current.converged = false;
  return current;
}

FitResult fit_measurement_rate(const std::vector<double>& times, const std::vector<double>& infidelities) {
  if (times.size() != infidelities.size()) throw FitError("fit_measurement_rate: length mismatch");
  if (times.size() < 2) throw FitError("fit_measurement_rate: at least 2 samples are required");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(infidelities[i] > 0.0 && infidelities[i] <= 0.5)) {
      throw FitError("fit_measurement_rate: infidelities must lie in (0, 0.5]");
    }
    if (!(times[i] > 0.0)) throw FitError("fit_measurement_rate: times must be positive");
  }
  bool all_half = true;
  for (double v : infidelities) all_half = all_half && v >= 0.5 - 1e-15;
  if (all_half) throw FitError("fit_measurement_rate: series carries no information (all 0.5)");

  auto cost = [&](double log_rate) {
    const double rate = std::exp(log_rate);
    double ss = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double model = 1.0 - normal_cdf(std::sqrt(2.0 * rate * times[i]));
      ss += (model - infidelities[i]) * (model - infidelities[i]);
    }
    return ss;
  };
  // coarse scan of log(rate) over a wide bracket, then golden-section refinement
  const double tmax = *std::max_element(times.begin(), times.end());
  const double tmin = *std::min_element(times.begin(), times.end());
  const double lo0 = std::log(1e-4 / tmax);
  const double hi0 = std::log(1e3 / tmin);
  const int scan = 400;
  int best = 0;
  double best_cost = INFINITY;
  for (int i = 0; i <= scan; ++i) {
    const double c = cost(lo0 + (hi0 - lo0) * i / scan);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }
  const double step = (hi0 - lo0) / scan;
  double a = lo0 + step * std::max(best - 1, 0);
  double b = lo0 + step * std::min(best + 1, scan);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = cost(x1);
  double f2 = cost(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = cost(x2);
    }
  }
  FitResult r;
  r.rate = std::exp(0.5 * (a + b));
  r.residual = std::sqrt(cost(0.5 * (a + b)) / static_cast<double>(times.size()));
  r.samples = times.size();
  r.window_lo = tmin;
  r.window_hi = tmax;
  return r;
}

}  // namespace qmq
