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

#include "qmq/analytics.hpp"

#include <cmath>
#include <sstream>

#include "qmq/constants.hpp"
#include "qmq/errors.hpp"

namespace qmq {

namespace {

constexpr double kBesselSeriesLimit = 30.0;

// Distance of phase from the nearest multiple of 2 pi.
double distance_to_2kpi(double phase) {
  const double two_pi = 2.0 * kPi;
  return std::abs(phase - two_pi * std::round(phase / two_pi));
}

// sum_k (x/2)^(2k+nu) / (k! (k+nu)!) for nu in {0, 1}, x >= 0
double bessel_series(double x, int nu) {
  const double q = 0.25 * x * x;
  double term = nu == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + nu));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// exp(-x) I_nu(x) for large x from the asymptotic expansion, truncated at its smallest term.
double bessel_asymptotic_scaled(double x, int nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (static_cast<double>(k) * 8.0 * x);
    if (std::abs(term) > std::abs(prev)) break;
    sum += term;
    prev = term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * kPi * x);
}

double sin2(double x) {
  const double s = std::sin(x);
  return s * s;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bessel_i0(double x) {
  const double ax = std::abs(x);
  if (ax <= kBesselSeriesLimit) return bessel_series(ax, 0);
  return std::exp(ax) * bessel_asymptotic_scaled(ax, 0);
}

double bessel_i1(double x) {
  const double ax = std::abs(x);
  const double v = ax <= kBesselSeriesLimit ? bessel_series(ax, 1) : std::exp(ax) * bessel_asymptotic_scaled(ax, 1);
  return x < 0.0 ? -v : v;
}

double bessel_i0_scaled(double x) {
  const double ax = std::abs(x);
  if (ax <= kBesselSeriesLimit) return std::exp(-ax) * bessel_series(ax, 0);
  return bessel_asymptotic_scaled(ax, 0);
}

double bessel_i1_scaled(double x) {
  const double ax = std::abs(x);
  const double v = ax <= kBesselSeriesLimit ? std::exp(-ax) * bessel_series(ax, 1) : bessel_asymptotic_scaled(ax, 1);
  return x < 0.0 ? -v : v;
}

double transmission_contrast(double gamma, double delta_gamma, double delta_tau, double delta_z) {
  return sin2((gamma + delta_z) * delta_tau / kHbar) - sin2((gamma - delta_gamma) * delta_tau / kHbar);
}

MeasurementRate measurement_rate(double delta_gamma, double delta_tau, double delta_z) {
  if (!(delta_tau > 0.0)) throw DomainError("measurement_rate: delta_tau must be positive");
  MeasurementRate r;
  const double coupling = (delta_gamma + delta_z) / kHbar;
  r.leading.value = 0.5 * coupling * coupling * delta_tau;
  r.delta_p = std::sin(coupling * delta_tau);
  const double dp2 = r.delta_p * r.delta_p;
  if (dp2 >= 1.0) {
    r.exact.value = INFINITY;
    r.exact.valid = false;
    r.exact.reason = "contrast reaches 1 (projective single step)";
  } else {
    r.exact.value = dp2 / (2.0 * delta_tau * (1.0 - dp2));
  }
  return r;
}

DephasingRate dephasing_rate(double delta_p, double delta_tau) {
  if (!(std::abs(delta_p) < 1.0)) throw DomainError("dephasing_rate: |delta_p| must be below 1");
  if (!(delta_tau > 0.0)) throw DomainError("dephasing_rate: delta_tau must be positive");
  DephasingRate r;
  const double dp2 = delta_p * delta_p;
  r.exact.value = -std::log1p(-dp2) / (2.0 * delta_tau);
  r.quadratic.value = dp2 / (2.0 * delta_tau);
  return r;
}

RatePrediction relaxation_rate_charge(double t, double delta_gamma, double epsilon, double delta_tau,
                                      double guard_half_width) {
  if (!(epsilon > 0.0)) throw DomainError("relaxation_rate_charge: epsilon must be positive");
  if (!(delta_tau > 0.0)) throw DomainError("relaxation_rate_charge: delta_tau must be positive");
  RatePrediction r;
  const double e2 = epsilon * epsilon;
  r.value = 0.5 * t * t * delta_gamma * delta_gamma / (e2 * e2 * delta_tau) * sin2(epsilon * delta_tau / kHbar);
  const double omega = std::sqrt(e2 + t * t);
  const double phase = 2.0 * omega * delta_tau / kHbar;
  const double dist = distance_to_2kpi(phase);
  if (dist < guard_half_width) {
    r.valid = false;
    std::ostringstream os;
    os << "2 Omega dtau / hbar = " << phase << " lies within " << guard_half_width << " rad of a multiple of 2 pi";
    r.reason = os.str();
  }
  return r;
}

namespace {

RatePrediction guarded(double value, double phase, double guard_half_width) {
  RatePrediction r;
  r.value = value;
  if (distance_to_2kpi(phase) < guard_half_width) {
    r.valid = false;
    std::ostringstream os;
    os << "phase " << phase << " lies within " << guard_half_width << " rad of a multiple of 2 pi";
    r.reason = os.str();
  }
  return r;
}

SpinTunnelingRates tunneling_rates_with_gaps(double t, double delta_gamma, double g1, double g2, double delta_tau,
                                             double guard_half_width) {
  if (g1 == 0.0 || g2 == 0.0) throw DomainError("spin_residual_tunneling_rates: resonant denominator");
  if (!(delta_tau > 0.0)) throw DomainError("spin_residual_tunneling_rates: delta_tau must be positive");
  SpinTunnelingRates r;
  const double pref = 4.0 * delta_gamma * delta_gamma * t * t;
  r.b_updown = pref / std::pow(g1, 4) * sin2(g1 * delta_tau / (2.0 * kHbar));
  r.b_downup = pref / std::pow(g2, 4) * sin2(g2 * delta_tau / (2.0 * kHbar));
  r.rate_updown = guarded(2.0 * r.b_updown / delta_tau, g1 * delta_tau / kHbar, guard_half_width);
  r.rate_downup = guarded(2.0 * r.b_downup / delta_tau, g2 * delta_tau / kHbar, guard_half_width);
  return r;
}

}  // namespace

RatePrediction leakage_rate(double delta_x, double z_r, double delta_tau, double guard_half_width) {
  if (!(z_r > 0.0)) throw DomainError("leakage_rate: Z_R must be positive");
  if (!(delta_tau > 0.0)) throw DomainError("leakage_rate: delta_tau must be positive");
  const double phase = z_r * delta_tau / kHbar;
  return guarded(2.0 * delta_x * delta_x / (z_r * z_r * delta_tau) * sin2(phase), phase, guard_half_width);
}

RatePrediction leakage_rate_perturbative(double delta_x, double z_r, double delta_tau, double guard_half_width) {
  if (!(z_r > 0.0)) throw DomainError("leakage_rate_perturbative: Z_R must be positive");
  if (!(delta_tau > 0.0)) throw DomainError("leakage_rate_perturbative: delta_tau must be positive");
  const double phase = z_r * delta_tau / kHbar;
  return guarded(8.0 * delta_x * delta_x / (z_r * z_r * delta_tau) * sin2(0.5 * phase), phase, guard_half_width);
}

SpinTunnelingRates spin_residual_tunneling_rates(double t, double delta_gamma, double epsilon, double U, double z_l,
                                                 double z_r, double delta_tau, double guard_half_width) {
  const double dz = z_l - z_r;
  return tunneling_rates_with_gaps(t, delta_gamma, epsilon - U + dz, epsilon - U - dz, delta_tau, guard_half_width);
}

SpinTunnelingRates spin_residual_tunneling_rates_level_spacing(double t, double delta_gamma, double epsilon, double U,
                                                               double z_l, double z_r, double delta_tau,
                                                               double guard_half_width) {
  const double dz = z_l - z_r;
  return tunneling_rates_with_gaps(t, delta_gamma, epsilon - U + 0.5 * dz, epsilon - U - 0.5 * dz, delta_tau,
                                   guard_half_width);
}

double infidelity_estimate(double gamma_m, double gamma_rel, double tau) {
  if (gamma_m < 0.0 || gamma_rel < 0.0) throw DomainError("infidelity_estimate: rates must be non-negative");
  if (tau < 0.0) throw DomainError("infidelity_estimate: tau must be non-negative");
  const double x = 0.5 * gamma_rel * tau;
  return 1.0 - normal_cdf(std::sqrt(2.0 * gamma_m * tau)) + 0.5 * (1.0 - bessel_i0_scaled(x));
}

IdealIntegrationTime ideal_integration_time(double gamma_m, double gamma_rel) {
  if (!(gamma_rel > 0.0)) throw DomainError("ideal_integration_time: gamma_rel must be positive");
  if (!(gamma_m > 0.0)) throw DomainError("ideal_integration_time: gamma_m must be positive");
  if (gamma_rel >= 2.0 * gamma_m) throw DomainError("ideal_integration_time: no minimum for gamma_rel >= 2 gamma_m");
  IdealIntegrationTime out;
  out.closed_form = std::log(2.0 * gamma_m / gamma_rel) / gamma_m;

  // tau * d/dtau of the estimate, up to a positive factor
  auto stationarity = [&](double tau) {
    const double x = 0.5 * gamma_rel * tau;
    const double relax = 0.5 * x * (bessel_i0_scaled(x) - bessel_i1_scaled(x));
    const double meas = std::sqrt(gamma_m * tau) * std::exp(-gamma_m * tau) / (2.0 * std::sqrt(kPi));
    return relax - meas;
  };
  double lo = 0.1 * out.closed_form;
  double hi = 10.0 * out.closed_form;
  double flo = stationarity(lo);
  const double fhi = stationarity(hi);
  if (flo * fhi > 0.0) throw DomainError("ideal_integration_time: no sign change on [0.1, 10] x closed form");
  while ((hi - lo) > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double fm = stationarity(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  out.refined = 0.5 * (lo + hi);
  return out;
}

}  // namespace qmq
