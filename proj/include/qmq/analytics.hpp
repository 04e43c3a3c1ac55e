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

#include <string>

namespace qmq {

// A closed-form rate with a validity flag (false near resonances where the
// perturbative expansion breaks down).
struct RatePrediction {
  double value = 0.0;  // 1/ns
  bool valid = true;
  std::string reason;
};

inline constexpr double kDefaultGuardHalfWidth = 0.2;  // rad

double normal_cdf(double x);
// I0(x), I1(x): power series for |x| <= 30, asymptotic expansion beyond.
double bessel_i0(double x);
double bessel_i1(double x);
// exp(-|x|) I0(x) and exp(-|x|) I1(x), finite for all x.
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

// sin^2((gamma + dz) dtau/hbar) - sin^2((gamma - dgamma) dtau/hbar): per-step transmission
// contrast between the two computational states (dz = 0 for the charge qubit).
double transmission_contrast(double gamma, double delta_gamma, double delta_tau, double delta_z = 0.0);

struct MeasurementRate {
  RatePrediction leading;  // (1/2) ((dgamma + dz)/hbar)^2 dtau
  RatePrediction exact;    // dp^2 / (2 dtau (1 - dp^2)) with dp = sin((dgamma + dz) dtau/hbar)
  double delta_p = 0.0;
};

// The exact form assumes dtau is the calibrated timestep, where the contrast
// reduces to sin((dgamma + dz) dtau / hbar).
MeasurementRate measurement_rate(double delta_gamma, double delta_tau, double delta_z = 0.0);

struct DephasingRate {
  RatePrediction exact;      // -ln(1 - dp^2) / (2 dtau)
  RatePrediction quadratic;  // dp^2 / (2 dtau)
};

// Throws DomainError for |dp| >= 1.
DephasingRate dephasing_rate(double delta_p, double delta_tau);

// (1/2) t^2 dgamma^2 / (eps^4 dtau) sin^2(eps dtau / hbar); invalid when 2 Omega dtau/hbar,
// Omega = sqrt(eps^2 + t^2), lies within guard_half_width of a multiple of 2 pi.
RatePrediction relaxation_rate_charge(double t, double delta_gamma, double epsilon, double delta_tau,
                                      double guard_half_width = kDefaultGuardHalfWidth);

// 2 dx^2 / (Z_R^2 dtau) sin^2(Z_R dtau / hbar); invalid when Z_R dtau/hbar is near 2 k pi.
RatePrediction leakage_rate(double delta_x, double z_r, double delta_tau,
                            double guard_half_width = kDefaultGuardHalfWidth);

// Second-order transition rate between the two levels split by Z_R and coupled by dx,
// derived like the charge relaxation rate with the spin-flip gap Z_R:
// 8 dx^2 / (Z_R^2 dtau) sin^2(Z_R dtau / (2 hbar)).
RatePrediction leakage_rate_perturbative(double delta_x, double z_r, double delta_tau,
                                         double guard_half_width = kDefaultGuardHalfWidth);

struct SpinTunnelingRates {
  double b_updown = 0.0;  // per-step probability S(0,2) <-> up-down
  double b_downup = 0.0;  // per-step probability S(0,2) <-> down-up
  RatePrediction rate_updown;  // 2 b / dtau
  RatePrediction rate_downup;
};

// b = 4 dgamma^2 t^2 / G^4 sin^2(G dtau / (2 hbar)) with G = eps - U +/- dZ, dZ = Z_L - Z_R.
// Throws DomainError when a denominator vanishes.
SpinTunnelingRates spin_residual_tunneling_rates(double t, double delta_gamma, double epsilon, double U, double z_l,
                                                 double z_r, double delta_tau,
                                                 double guard_half_width = kDefaultGuardHalfWidth);

// Same expression with G set to the actual level spacing eps - U +/- dZ/2.
SpinTunnelingRates spin_residual_tunneling_rates_level_spacing(double t, double delta_gamma, double epsilon, double U,
                                                               double z_l, double z_r, double delta_tau,
                                                               double guard_half_width = kDefaultGuardHalfWidth);

// 1 - Phi(sqrt(2 Gm tau)) + (1 - exp(-x) I0(x)) / 2, x = Grel tau / 2.
double infidelity_estimate(double gamma_m, double gamma_rel, double tau);

struct IdealIntegrationTime {
  double closed_form = 0.0;  // ln(2 Gm / Grel) / Gm
  double refined = 0.0;      // stationary point of infidelity_estimate
};

// Throws DomainError unless 0 < Grel < 2 Gm.
IdealIntegrationTime ideal_integration_time(double gamma_m, double gamma_rel);

}  // namespace qmq
