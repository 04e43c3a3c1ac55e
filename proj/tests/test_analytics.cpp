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

#include <cmath>
#include <functional>

#include "qmq/analytics.hpp"
#include "qmq/constants.hpp"
#include "qmq/engine.hpp"
#include "qmq/errors.hpp"
#include "qmq/models.hpp"

using namespace qmq;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// e^{-x} I_nu(x) = (1/pi) int_0^pi e^{x (cos th - 1)} cos(nu th) dth
double scaled_bessel_integral(int nu, double x) {
  return simpson([&](double th) { return std::exp(x * (std::cos(th) - 1.0)) * std::cos(nu * th); }, 0.0, kPi) / kPi;
}

double sin2(double x) { return std::sin(x) * std::sin(x); }

}  // namespace

TEST_CASE("normal cdf reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-14));
  CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-10));
}

TEST_CASE("Bessel functions against the integral representation") {
  for (double x : {0.0, 0.3, 1.0, 4.0, 12.0, 29.0, 31.0, 80.0, 400.0}) {
    CAPTURE(x);
    CHECK(bessel_i0_scaled(x) == doctest::Approx(scaled_bessel_integral(0, x)).epsilon(1e-9));
    CHECK(bessel_i1_scaled(x) == doctest::Approx(scaled_bessel_integral(1, x)).epsilon(1e-9));
    if (x < 50.0) {
      CHECK(bessel_i0(x) == doctest::Approx(std::exp(x) * bessel_i0_scaled(x)).epsilon(1e-12));
      CHECK(bessel_i1(x) == doctest::Approx(std::exp(x) * bessel_i1_scaled(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("measurement and dephasing rates") {
  const double dtau = calibrate_timestep(5.0, 0.5);
  const MeasurementRate m = measurement_rate(0.5, dtau);
  CHECK(m.leading.value == doctest::Approx(0.5 * std::pow(0.5 / kHbar, 2) * dtau).epsilon(1e-14));
  const double dp = std::sin(0.5 * dtau / kHbar);
  CHECK(m.exact.value == doctest::Approx(dp * dp / (2.0 * dtau * (1.0 - dp * dp))).epsilon(1e-14));
  CHECK(m.exact.value > m.leading.value);
  const DephasingRate d = dephasing_rate(dp, dtau);
  CHECK(d.exact.value == doctest::Approx(-std::log(1.0 - dp * dp) / (2.0 * dtau)).epsilon(1e-13));
  CHECK(d.quadratic.value < d.exact.value);
  CHECK_THROWS_AS(dephasing_rate(1.0, dtau), DomainError);
  CHECK_THROWS_AS(measurement_rate(0.5, 0.0), DomainError);
  // the calibrated step places the transmission probabilities symmetrically about 1/2
  CHECK(sin2(5.0 * dtau / kHbar) + sin2(4.5 * dtau / kHbar) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(transmission_contrast(5.0, 0.5, dtau) == doctest::Approx(sin2(5.0 * dtau / kHbar) - sin2(4.5 * dtau / kHbar)));
}

TEST_CASE("relaxation rate and its guard") {
  const double dtau = calibrate_timestep(5.0, 0.5);
  const RatePrediction r = relaxation_rate_charge(0.5, 0.5, 10.0, dtau);
  CHECK(r.valid);
  CHECK(r.value == doctest::Approx(0.5 * 0.25 * 0.25 / (1e4 * dtau) * sin2(10.0 * dtau / kHbar)).epsilon(1e-14));
  // 2 Omega dtau / hbar = 2 pi
  const double eps = kPi * kHbar / dtau;
  const RatePrediction bad = relaxation_rate_charge(0.0, 0.5, eps, dtau);
  CHECK_FALSE(bad.valid);
  CHECK_FALSE(bad.reason.empty());
  CHECK(relaxation_rate_charge(0.0, 0.5, eps, dtau, 0.0).valid);
  CHECK_THROWS_AS(relaxation_rate_charge(0.5, 0.5, 0.0, dtau), DomainError);
}

TEST_CASE("leakage rate expressions") {
  const double dtau = calibrate_timestep(5.0, 0.5);
  const RatePrediction eq = leakage_rate(0.05, 9.0, dtau);
  CHECK(eq.value == doctest::Approx(2.0 * 0.0025 / (81.0 * dtau) * sin2(9.0 * dtau / kHbar)).epsilon(1e-14));
  const RatePrediction pert = leakage_rate_perturbative(0.05, 9.0, dtau);
  const double h = 4.5 * dtau / kHbar;
  CHECK(pert.value * std::cos(h) * std::cos(h) == doctest::Approx(eq.value).epsilon(1e-12));
  CHECK(leakage_rate(0.0, 9.0, dtau).value == 0.0);
  CHECK_FALSE(leakage_rate(0.05, 2.0 * kPi * kHbar / dtau, dtau).valid);
  CHECK_THROWS_AS(leakage_rate(0.05, 0.0, dtau), DomainError);
}

TEST_CASE("residual tunneling: level-spacing variant against the dynamics") {
  SpinQubitParams p;
  p.t = 0.5;
  const ReadoutModel m = make_spin_model(p);
  // dressed S(0,2): the system eigenvector with the largest S(0,2) weight
  const HermitianEigen eig = hermitian_eigen(m.system_hamiltonian);
  std::size_t best = 0;
  for (std::size_t j = 0; j < spin::kDim; ++j)
    if (std::norm(eig.vectors(spin::kS02, j)) > std::norm(eig.vectors(spin::kS02, best))) best = j;
  std::vector<cplx> dressed(spin::kDim);
  for (std::size_t i = 0; i < spin::kDim; ++i) dressed[i] = eig.vectors(i, best);

  const StepOperators step = step_operators(m.total_hamiltonian, m.delta_tau);
  const std::size_t n1 = 2000, n2 = 20000;
  const auto states = unconditional_trajectory(step, outer(dressed), {n1, n2});
  auto stay = [&](const ComplexMatrix& r) {
    cplx acc = 0.0;
    for (std::size_t a = 0; a < spin::kDim; ++a)
      for (std::size_t b = 0; b < spin::kDim; ++b) acc += std::conj(dressed[a]) * r(a, b) * dressed[b];
    return acc.real();
  };
  const double numeric = (stay(states[0]) - stay(states[1])) / ((n2 - n1) * m.delta_tau);

  const SpinTunnelingRates spacing = spin_residual_tunneling_rates_level_spacing(
      p.t, p.delta_gamma, p.epsilon, p.U, p.z_l, p.z_r, m.delta_tau);
  const double predicted = (spacing.b_updown + spacing.b_downup) / m.delta_tau;
  CHECK(numeric > 0.0);
  CHECK(numeric == doctest::Approx(predicted).epsilon(0.15));

  // the full-splitting form sits on the 2 pi resonance of the lower gap here
  const SpinTunnelingRates verbatim =
      spin_residual_tunneling_rates(p.t, p.delta_gamma, p.epsilon, p.U, p.z_l, p.z_r, m.delta_tau);
  CHECK_FALSE(verbatim.rate_downup.valid);
  CHECK(verbatim.rate_updown.value == doctest::Approx(2.0 * verbatim.b_updown / m.delta_tau));
  CHECK_THROWS_AS(spin_residual_tunneling_rates(p.t, p.delta_gamma, 1002.0, 1000.0, 11.0, 9.0, m.delta_tau),
                  DomainError);
}

TEST_CASE("infidelity estimate and ideal integration time") {
  CHECK(infidelity_estimate(0.03, 0.0, 0.0) == doctest::Approx(0.5));
  CHECK(infidelity_estimate(0.0, 0.001, 1e6) > 0.99);
  CHECK(infidelity_estimate(0.0, 0.001, 1e6) < 1.0);
  const double gm = 0.0314, gr = 4.56e-4;
  const IdealIntegrationTime tid = ideal_integration_time(gm, gr);
  CHECK(tid.closed_form == doctest::Approx(std::log(2.0 * gm / gr) / gm).epsilon(1e-14));
  // stationarity of the estimate at the refined time, by central differences
  const double h = 1e-3 * tid.refined;
  const double slope =
      (infidelity_estimate(gm, gr, tid.refined + h) - infidelity_estimate(gm, gr, tid.refined - h)) / (2.0 * h);
  CHECK(std::abs(slope) < 1e-9);
  for (double f : {0.8, 1.25})
    CHECK(infidelity_estimate(gm, gr, f * tid.refined) > infidelity_estimate(gm, gr, tid.refined));
  CHECK_THROWS_AS(ideal_integration_time(gm, 2.5 * gm), DomainError);
  CHECK_THROWS_AS(infidelity_estimate(-1.0, 0.0, 1.0), DomainError);
}
