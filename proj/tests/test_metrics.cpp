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

#include <algorithm>
#include <cmath>

#include "qmq/analytics.hpp"
#include "qmq/constants.hpp"
#include "qmq/engine.hpp"
#include "qmq/errors.hpp"
#include "qmq/metrics.hpp"
#include "qmq/models.hpp"

using namespace qmq;

namespace {

double log_binomial(std::size_t n, std::size_t k, double p) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
         (n - k) * std::log1p(-p);
}

// Two independent binomials, likelihood assignment with ties to g.
double binomial_infidelity(std::size_t n, double pe, double pg) {
  double miss = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double le = log_binomial(n, k, pe);
    const double lg = log_binomial(n, k, pg);
    const bool says_e = le - lg > 1e-9;
    miss += says_e ? std::exp(lg) : std::exp(le);
  }
  return 0.5 * miss;
}

double sin2(double x) { return std::sin(x) * std::sin(x); }

std::vector<std::size_t> stride_grid(std::size_t from, std::size_t to, std::size_t stride) {
  std::vector<std::size_t> g;
  for (std::size_t n = from; n <= to; n += stride) g.push_back(n);
  return g;
}

}  // namespace

TEST_CASE("infidelity of ideal and swapped operations") {
  const std::vector<cplx> e{1.0, 0.0}, g{0.0, 1.0};
  const ComplexMatrix ue = transfer_matrix(projector(2, 0));
  const ComplexMatrix ug = transfer_matrix(projector(2, 1));
  CHECK(infidelity(ue, ug, e, g) == doctest::Approx(0.0));
  CHECK(infidelity(ug, ue, e, g) == doctest::Approx(1.0));
  CHECK(mixedness(ue, outer(e)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(post_measurement_state(ue, outer(g)), UndefinedConditionalError);
  const ComplexMatrix not_projector = cplx{0.5} * ComplexMatrix::identity(2);
  CHECK_THROWS_AS(leakage(ug, ue, outer(e), not_projector), DomainError);
}

TEST_CASE("t = 0 infidelity equals the two-binomial oracle") {
  ChargeQubitParams p;
  const ReadoutModel m = make_charge_model(p);
  const double pe = sin2(p.gamma * m.delta_tau / kHbar);
  const double pg = sin2((p.gamma - p.delta_gamma) * m.delta_tau / kHbar);
  const std::vector<std::size_t> grid{1, 2, 7, 50, 51, 300, 301, 1200};
  const BenchmarkSeries s = benchmark_series(m, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(s.infidelity[i] == doctest::Approx(binomial_infidelity(grid[i], pe, pg)).epsilon(1e-9));
    CHECK(s.eps_up[i] + s.eps_down[i] == doctest::Approx(2.0 * s.infidelity[i]).epsilon(1e-12));
  }
}

TEST_CASE("t = 0 infidelity follows the Gaussian law") {
  ChargeQubitParams p;
  const ReadoutModel m = make_charge_model(p);
  const double gm = measurement_rate(p.delta_gamma, m.delta_tau).leading.value;
  const std::vector<std::size_t> grid = log_grid(200, 3000, 12);
  const BenchmarkSeries s = benchmark_series(m, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double law = 1.0 - normal_cdf(std::sqrt(2.0 * gm * s.integration_times[i]));
    CHECK(std::abs(s.infidelity[i] - law) < 2e-3);
  }
  // the fitted rate recovers the leading-order one
  const FitResult f = fit_measurement_rate(s.integration_times, s.infidelity);
  CHECK(f.rate == doctest::Approx(gm).epsilon(0.02));
}

TEST_CASE("t = 0 infidelity decreases along odd N and post-measurement states purify") {
  ChargeQubitParams p;
  const ReadoutModel m = make_charge_model(p);
  const BenchmarkSeries s = benchmark_series(m, stride_grid(1, 2001, 50));
  for (std::size_t i = 1; i < s.steps.size(); ++i) CHECK(s.infidelity[i] < s.infidelity[i - 1]);
  CHECK(s.mixedness_e.back() < 0.02);
  CHECK(s.mixedness_e.back() < s.mixedness_e.front());
}

TEST_CASE("mixedness has an interior minimum when the qubit relaxes") {
  ChargeQubitParams p;
  p.t = 0.5;
  const ReadoutModel m = make_charge_model(p);
  const BenchmarkSeries s = benchmark_series(m, log_grid(1, 6000, 30));
  const auto best = std::min_element(s.mixedness_e.begin(), s.mixedness_e.end());
  CHECK(best != s.mixedness_e.begin());
  CHECK(best + 1 != s.mixedness_e.end());
  CHECK(*best < s.mixedness_e.back());
}

TEST_CASE("benchmark values stay in range and traces are preserved") {
  SpinQubitParams p;
  p.t = 1.0;
  p.delta = {0.05, 0.02, -0.01};
  const ReadoutModel m = make_spin_model(p);
  const BenchmarkSeries s = benchmark_series(m, log_grid(1, 800, 15));
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    for (double v : {s.infidelity[i], s.eps_up[i], s.eps_down[i], s.mixedness_e[i], s.mixedness_g[i], s.leakage[i]}) {
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
    CHECK(s.trace_drift[i] < 1e-10);
  }
}

TEST_CASE("streaming and full-history series agree") {
  SpinQubitParams p;
  p.t = 0.7;
  p.delta = {0.1, 0.0, 0.03};
  p.z_l = 11.05;
  const ReadoutModel m = make_spin_model(p);
  const std::vector<std::size_t> grid{3, 40, 41, 200};
  const BenchmarkSeries a = benchmark_series(m, grid);
  const BenchmarkSeries b = benchmark_series_full(m, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a.infidelity[i] == doctest::Approx(b.infidelity[i]).epsilon(1e-10));
    CHECK(a.eps_up[i] == doctest::Approx(b.eps_up[i]).epsilon(1e-10));
    CHECK(a.mixedness_e[i] == doctest::Approx(b.mixedness_e[i]).epsilon(1e-10));
    CHECK(a.mixedness_g[i] == doctest::Approx(b.mixedness_g[i]).epsilon(1e-10));
    CHECK(a.leakage[i] == doctest::Approx(b.leakage[i]).epsilon(1e-10));
    CHECK(a.k_critical[i] == b.k_critical[i]);
  }
}

TEST_CASE("infidelity does not depend on which state is called e") {
  ChargeQubitParams p;
  p.t = 1.0;
  ReadoutModel m = make_charge_model(p);
  const std::vector<std::size_t> grid{10, 101, 400};
  const BenchmarkSeries a = benchmark_series(m, grid);
  std::swap(m.e_state, m.g_state);
  const BenchmarkSeries b = benchmark_series(m, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a.infidelity[i] == doctest::Approx(b.infidelity[i]).epsilon(1e-10));
    // near-symmetric counts put a tie at N/2 for even N, which always goes to g
    if (grid[i] % 2 == 1) CHECK(a.eps_up[i] == doctest::Approx(b.eps_down[i]).epsilon(1e-10));
  }
}

TEST_CASE("leakage vanishes without a transverse field") {
  SpinQubitParams p;
  const BenchmarkSeries s = benchmark_series(make_spin_model(p), {10, 100, 500});
  for (double v : s.leakage) CHECK(std::abs(v) < 1e-14);
  const BenchmarkSeries c = benchmark_series(make_charge_model(ChargeQubitParams{}), {10, 100});
  for (double v : c.leakage) CHECK(v == 0.0);
}

TEST_CASE("leakage rate matches the second-order law") {
  SpinQubitParams p;
  p.delta = {0.25, 0.0, 0.0};
  const ReadoutModel m = make_spin_model(p);
  const BenchmarkSeries s = benchmark_series(m, stride_grid(5, 900, 5));
  std::vector<double> times, decay;
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    times.push_back(s.integration_times[i]);
    decay.push_back(1.0 - 2.0 * s.leakage[i]);
  }
  const FitResult f = fit_decay_rate_windowed(times, decay);
  CHECK(f.converged);
  const double pert = leakage_rate_perturbative(0.25, p.z_r, m.delta_tau).value;
  const double closed = 8.0 * 0.0625 / (81.0 * m.delta_tau) * sin2(4.5 * m.delta_tau / kHbar);
  CHECK(pert == doctest::Approx(closed).epsilon(1e-14));
  CHECK(f.rate == doctest::Approx(pert).epsilon(0.01));
  // the single-gap expression sits lower by cos^2 of the half phase
  const double single_gap = leakage_rate(0.25, p.z_r, m.delta_tau).value;
  const double half = 0.5 * p.z_r * m.delta_tau / kHbar;
  CHECK(single_gap / pert == doctest::Approx(std::cos(half) * std::cos(half)).epsilon(1e-12));
}

TEST_CASE("t = 2 relaxation rate within 10 percent") {
  ChargeQubitParams p;
  p.t = 2.0;
  const ReadoutModel m = make_charge_model(p);
  const double predicted = relaxation_rate_charge(p.t, p.delta_gamma, p.epsilon, m.delta_tau).value;
  const StepOperators step = step_operators(m.total_hamiltonian, m.delta_tau);
  const std::size_t n_end = static_cast<std::size_t>(2.5 / predicted / m.delta_tau);
  std::vector<std::size_t> at;
  for (std::size_t i = 1; i <= 100; ++i) at.push_back(n_end * i / 100);
  const auto states = unconditional_trajectory(step, outer(m.e_state), at);
  std::vector<double> times, diff;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const ComplexMatrix& r = states[i];
    double pe = 0.0, pg = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) {
        pe += (std::conj(m.e_state[a]) * r(a, b) * m.e_state[b]).real();
        pg += (std::conj(m.g_state[a]) * r(a, b) * m.g_state[b]).real();
      }
    times.push_back(at[i] * m.delta_tau);
    diff.push_back(pe - pg);
  }
  const FitResult f = fit_decay_rate_windowed(times, diff);
  CHECK(f.rate == doctest::Approx(predicted).epsilon(0.10));
}

TEST_CASE("decay fits") {
  std::vector<double> t, y;
  for (int i = 0; i < 60; ++i) {
    t.push_back(5.0 * i);
    y.push_back(0.8 * std::exp(-0.013 * t.back()));
  }
  const FitResult f = fit_decay_rate(t, y);
  CHECK(f.rate == doctest::Approx(0.013).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(0.8).epsilon(1e-12));
  const FitResult w = fit_decay_rate_windowed(t, y);
  CHECK(w.converged);
  CHECK(w.rate == doctest::Approx(0.013).epsilon(1e-12));

  std::vector<double> inf;
  for (double x : t) inf.push_back(x > 0.0 ? 1.0 - normal_cdf(std::sqrt(2.0 * 0.02 * x)) : 0.5);
  t.erase(t.begin());
  inf.erase(inf.begin());
  CHECK(fit_measurement_rate(t, inf).rate == doctest::Approx(0.02).epsilon(1e-6));

  CHECK_THROWS_AS(fit_decay_rate({1, 2, 3}, {1, 1, 1}), FitError);
  CHECK_THROWS_AS(fit_decay_rate({1, 2, 3, 4, 5}, {1, 1, 0, 1, 1}), FitError);
  CHECK_THROWS_AS(fit_measurement_rate({1, 2}, {0.5, 0.5}), FitError);
}

TEST_CASE("grids") {
  CHECK(dense_grid(4) == std::vector<std::size_t>{1, 2, 3, 4});
  const auto g = log_grid(1, 1000, 30);
  CHECK(g.front() == 1);
  CHECK(g.back() == 1000);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
  CHECK_THROWS_AS(log_grid(0, 10, 3), DomainError);
  CHECK_THROWS_AS(benchmark_series(make_charge_model(ChargeQubitParams{}), {5, 5}), DomainError);
  CHECK_THROWS_AS(benchmark_series(make_charge_model(ChargeQubitParams{}), {50}, 10), ResourceError);
}
