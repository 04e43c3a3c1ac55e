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

// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned below. Criteria listed in
// kExpectedFailures are evaluated in full and reported as "FAIL (known)"; only other failures make
// the exit status nonzero.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qmq/analytics.hpp"
#include "qmq/config.hpp"
#include "qmq/constants.hpp"
#include "qmq/engine.hpp"
#include "qmq/linalg.hpp"
#include "qmq/metrics.hpp"
#include "qmq/models.hpp"
#include "qmq/protocols.hpp"
#include "qmq/scenarios.hpp"
#include "qmq/sweetspot.hpp"

using namespace qmq;
using nlohmann::json;

namespace {

// ---- pinned tolerances ------------------------------------------------------

constexpr double kQuotedTimestep = 0.11;        // ns
constexpr double kTimestepRelTol = 0.02;
constexpr double kQuotedMeanCurrent = 1.0;      // nA, order of magnitude
constexpr double kQuotedContrast = 0.1;         // nA, order of magnitude
constexpr double kCurrentFactor = 1.5;
constexpr double kOracleChannelTol = 1e-10;
constexpr std::size_t kOracleMaxN = 10;
constexpr int kOracleSeeds = 5;
constexpr double kEpsUpAbsTol = 1e-3;
constexpr std::size_t kExactNMin = 200;
constexpr std::size_t kExactNMax = 2000;
constexpr double kRelaxRelTol = 0.10;
constexpr double kGuardMinDiscrepancy = 0.50;
constexpr double kTauIdRelTol = 0.30;
constexpr double kTauShiftRelTol = 0.20;
constexpr double kLeakLawRelTol = 0.05;
constexpr double kLeakSaturationRelTol = 0.02;
constexpr double kGammaMRelTol = 0.10;
constexpr double kGammaMLinearR2 = 0.99;
constexpr double kSweetSpotTol = 1e-8;
constexpr int kSweetSpotPairs = 20;
constexpr double kSmeRatio = 2.0;
constexpr double kSmeRatioTol = 0.05;
constexpr double kSmeRelRatio = 5.5;
constexpr double kSmeRelRatioTol = 0.10;
constexpr double kSmeSigmas = 3.0;
constexpr double kRoundTripTol = 1e-12;
constexpr double kLeakExperimentSigmas = 2.0;
const std::set<int> kExpectedFailures = {4, 7};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string config_path(const std::string& name) { return std::string(QMQ_SOURCE_DIR) + "/configs/" + name; }

const std::string& artifact(const RunResult& r, const std::string& name) {
  for (const auto& a : r.artifacts)
    if (a.name == name) return a.content;
  throw std::runtime_error("missing artifact " + name);
}

// Split CSV text into rows of fields; the header row is dropped.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

RunResult run_with_threads(const std::string& scenario, const json& cfg, int threads) {
  omp_set_num_threads(threads);
  RunOptions opt;
  opt.config_dir = std::string(QMQ_SOURCE_DIR) + "/configs";
  RunResult r = run_scenario(scenario, cfg, opt);
  omp_set_num_threads(1);
  return r;
}

// Lazily computed scenario runs shared between criteria.
struct Shared {
  json fig2 = load_config_file(config_path("fig2.toml"));
  json fig3 = load_config_file(config_path("fig3.toml"));
  std::map<std::string, RunResult> runs;

  const RunResult& get(const std::string& scenario, const json& cfg) {
    auto it = runs.find(scenario);
    if (it == runs.end()) it = runs.emplace(scenario, run_with_threads(scenario, cfg, 1)).first;
    return it->second;
  }
  const RunResult& charge() { return get("charge-readout", fig2); }
  const RunResult& spin() { return get("spin-readout", fig3); }
};

double population(const ComplexMatrix& rho, const std::vector<cplx>& v) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) acc += std::conj(v[i]) * rho(i, j) * v[j];
  return acc.real();
}

ComplexMatrix matrix_power(ComplexMatrix a, std::uint64_t n) {
  ComplexMatrix r = ComplexMatrix::identity(a.rows());
  while (n > 0) {
    if (n & 1u) r = r * a;
    a = a * a;
    n >>= 1u;
  }
  return r;
}

// Unconditional decay rate of the e-g population difference from |e>, for arbitrarily slow decay:
// the one-step superoperator is raised to powers to find the decay scale, then sampled linearly.
double numeric_relaxation_rate(const ReadoutModel& m) {
  const StepOperators s = step_operators(m.total_hamiltonian, m.delta_tau);
  const ComplexMatrix one = s.upsilon0 + s.upsilon1;
  const ComplexMatrix rho0 = outer(m.e_state);
  auto diff_after = [&](const ComplexMatrix& ups) {
    const ComplexMatrix r = apply_superoperator(ups, rho0);
    return population(r, m.e_state) - population(r, m.g_state);
  };
  std::uint64_t scale = 1;
  ComplexMatrix power = one;
  for (int j = 0; j < 62 && diff_after(power) > 0.3; ++j) {
    power = power * power;
    scale <<= 1u;
  }
  const std::uint64_t stride = std::max<std::uint64_t>(1, scale / 16);
  const ComplexMatrix hop = matrix_power(one, stride);
  std::vector<double> times, values;
  ComplexMatrix acc = ComplexMatrix::identity(one.rows());
  for (int i = 1; i <= 48; ++i) {
    acc = hop * acc;
    const double d = diff_after(acc);
    if (d <= 0.0) break;
    times.push_back(static_cast<double>(stride) * i * m.delta_tau);
    values.push_back(d);
  }
  return fit_decay_rate_windowed(times, values).rate;
}

// ---- criteria -----------------------------------------------------------------

Outcome c1_timestep() {
  const double dtau = calibrate_timestep(5.0, 0.5, 0.0);
  const double rel = std::abs(dtau - kQuotedTimestep) / kQuotedTimestep;
  return {rel <= kTimestepRelTol, "dtau = " + fmt("%.6f", dtau) + " ns, |rel dev| from 0.11 ns = " + fmt("%.4f", rel)};
}

Outcome c2_currents() {
  const double dtau = calibrate_timestep(5.0, 0.5, 0.0);
  const ModelCurrents c = model_currents(dtau, 5.0, 0.5);
  const double mean = c.mean_current * 1e9;
  const double contrast = c.current_contrast_linear * 1e9;
  auto within = [](double v, double ref) { return v >= ref / kCurrentFactor && v <= ref * kCurrentFactor; };
  return {within(mean, kQuotedMeanCurrent) && within(contrast, kQuotedContrast),
          "I = " + fmt("%.3f", mean) + " nA, dI = " + fmt("%.3f", contrast) + " nA (exact-step contrast " +
              fmt("%.3f", c.current_contrast * 1e9) + " nA)"};
}

Outcome c3_oracle() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int seed = 0; seed < kOracleSeeds; ++seed) {
    ChargeQubitParams c;
    c.epsilon = 1.0 + 19.0 * u(rng);
    c.t = 3.0 * u(rng);
    c.gamma = 3.0 + 4.0 * u(rng);
    c.delta_gamma = 0.1 + 0.9 * u(rng);
    SpinQubitParams sp;
    sp.epsilon = 1020.0 + 40.0 * u(rng);
    sp.t = 2.0 * u(rng);
    sp.delta = {0.3 * u(rng), 0.3 * (u(rng) - 0.5), 0.3 * (u(rng) - 0.5)};
    for (const ReadoutModel& m : {make_charge_model(c), make_spin_model(sp)}) {
      const StepOperators s = step_operators(m.total_hamiltonian, m.delta_tau);
      for (std::size_t n = 1; n <= kOracleMaxN; ++n) {
        const CountResolvedChannels fast = evolve_count_resolved(s, n);
        const CountResolvedChannels slow = brute_force_channels(s, n);
        for (std::size_t k = 0; k <= n; ++k) worst = std::max(worst, max_abs_diff(fast.channels[k], slow.channels[k]));
      }
    }
  }
  return {worst <= kOracleChannelTol, "max elementwise |diff| = " + fmt("%.2e", worst) + " over N <= 10, 5 seeds x 2 models"};
}

Outcome c4_t0() {
  ChargeQubitParams p;
  const ReadoutModel m = make_charge_model(p);
  std::vector<std::size_t> grid;
  for (std::size_t n = kExactNMin; n <= kExactNMax; ++n) grid.push_back(n);
  const BenchmarkSeries s = benchmark_series(m, grid);
  const double dp = transmission_contrast(p.gamma, p.delta_gamma, m.delta_tau);
  double kc_dev = 0.0, worst_even = 0.0, worst_odd = 0.0;
  bool monotone = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double n = static_cast<double>(grid[i]);
    kc_dev = std::max(kc_dev, std::abs(s.k_critical[i] - 0.5) * 2.0 * n);
    const double law = normal_cdf(-dp * std::sqrt(n) / std::sqrt(1.0 - dp * dp));
    double& worst = grid[i] % 2 ? worst_odd : worst_even;
    worst = std::max(worst, std::abs(s.eps_up[i] - law));
    if (i > 0 && s.infidelity[i] > s.infidelity[i - 1] + 1e-12) monotone = false;
  }
  const bool kc_ok = kc_dev <= 1.0 + 1e-9;
  const bool to_zero = s.infidelity.back() < 1e-3;
  const bool eps_ok = std::max(worst_even, worst_odd) <= kEpsUpAbsTol;
  return {kc_ok && monotone && to_zero && eps_ok,
          "max 2N|k_c - 1/2| = " + fmt("%.3f", kc_dev) + ", monotone " + (monotone ? "ok" : "no") +
              ", infidelity(2000) = " + fmt("%.2e", s.infidelity.back()) + ", max|eps_up - Phi| odd N = " +
              fmt("%.2e", worst_odd) + ", even N = " + fmt("%.2e", worst_even) + " (tie at N/2 assigned to g)"};
}

Outcome c5_relaxation(Shared& sh) {
  const json rates = json::parse(artifact(sh.charge(), "qmq_rates.json"));
  std::ostringstream d;
  bool ok = true;
  for (const auto& e : rates["series"]) {
    const double t = e["t_ueV"].get<double>();
    if (t == 0.0) continue;
    const auto& g = e["gamma_rel"];
    const double ratio = g.contains("ratio_fitted_over_predicted") ? g["ratio_fitted_over_predicted"].get<double>() : 0.0;
    ok = ok && std::abs(ratio - 1.0) <= kRelaxRelTol;
    d << "t=" << t << ": fitted/predicted = " << fmt("%.4f", ratio) << "; ";
  }
  // guard window: 2 Omega dtau / hbar = 2 pi at t = 2, epsilon swept onto the centre and its flanks
  ChargeQubitParams p;
  p.t = 2.0;
  const double dtau = calibrate_timestep(p.gamma, p.delta_gamma, 0.0);
  auto discrepancy_at = [&](double phase_offset) {
    const double omega = (2.0 * kPi + phase_offset) * kHbar / (2.0 * dtau);
    ChargeQubitParams q = p;
    q.epsilon = std::sqrt(omega * omega - q.t * q.t);
    const double predicted = relaxation_rate_charge(q.t, q.delta_gamma, q.epsilon, dtau, 0.0).value;
    const double numeric = numeric_relaxation_rate(make_charge_model(q));
    return std::abs(numeric / predicted - 1.0);
  };
  const double centre = discrepancy_at(0.0);
  ok = ok && centre > kGuardMinDiscrepancy;
  d << "guard centre discrepancy = " << fmt("%.2f", centre) << " (flanks -0.165/+0.165 rad: "
    << fmt("%.2f", discrepancy_at(-0.165)) << "/" << fmt("%.2f", discrepancy_at(0.165)) << ")";
  return {ok, d.str()};
}

// Location of the infidelity minimum over odd N, refined by a parabola through the neighbourhood.
double numeric_tau_id(double t, std::size_t n_max) {
  ChargeQubitParams p;
  p.t = t;
  const ReadoutModel m = make_charge_model(p);
  std::vector<std::size_t> grid;
  for (std::size_t n = 1; n <= n_max; n += 2) grid.push_back(n);
  const BenchmarkSeries s = benchmark_series(m, grid);
  const std::size_t at =
      static_cast<std::size_t>(std::min_element(s.infidelity.begin(), s.infidelity.end()) - s.infidelity.begin());
  if (at == 0 || at + 1 >= grid.size()) return -1.0;  // not interior
  const double tau0 = s.integration_times[at];
  double sx = 0, sx2 = 0, sx3 = 0, sx4 = 0, sy = 0, sxy = 0, sx2y = 0, n = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = s.integration_times[i] / tau0 - 1.0;
    if (std::abs(x) > 0.25) continue;
    const double y = s.infidelity[i];
    n += 1;
    sx += x;
    sx2 += x * x;
    sx3 += x * x * x;
    sx4 += x * x * x * x;
    sy += y;
    sxy += x * y;
    sx2y += x * x * y;
  }
  // normal equations for y = c0 + c1 x + c2 x^2 by Cramer's rule
  auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  };
  const double det = det3(n, sx, sx2, sx, sx2, sx3, sx2, sx3, sx4);
  const double c1 = det3(n, sy, sx2, sx, sxy, sx3, sx2, sx2y, sx4) / det;
  const double c2 = det3(n, sx, sy, sx, sx2, sxy, sx2, sx3, sx2y) / det;
  if (!(c2 > 0.0)) return tau0;
  return tau0 * (1.0 - 0.5 * c1 / c2);
}

Outcome c6_tau_id() {
  ChargeQubitParams p;
  const double dtau = calibrate_timestep(p.gamma, p.delta_gamma, 0.0);
  const double gm = measurement_rate(p.delta_gamma, dtau).leading.value;
  std::map<double, double> numeric;
  for (double t : {0.5, 1.0, 2.0}) numeric[t] = numeric_tau_id(t, 4001);
  std::ostringstream d;
  bool ok = true;
  for (double t : {0.5, 2.0}) {
    if (numeric[t] < 0.0) {
      ok = false;
      d << "t=" << t << ": no interior minimum; ";
      continue;
    }
    const double rel = relaxation_rate_charge(t, p.delta_gamma, p.epsilon, dtau).value;
    const double refined = ideal_integration_time(gm, rel).refined;
    const double dev = numeric[t] / refined - 1.0;
    ok = ok && std::abs(dev) <= kTauIdRelTol;
    d << "t=" << t << ": tau_min = " << fmt("%.1f", numeric[t]) << " ns vs root " << fmt("%.1f", refined)
      << " ns; ";
  }
  const double expected_shift = 2.0 * std::log(2.0) / gm;
  for (double t : {2.0, 1.0}) {
    const double shift = numeric[t / 2.0] - numeric[t];
    const double ratio = shift / expected_shift;
    ok = ok && numeric[t] > 0.0 && numeric[t / 2.0] > 0.0 && std::abs(ratio - 1.0) <= kTauShiftRelTol;
    d << "halving t=" << t << ": shift/(2 ln2/Gm) = " << fmt("%.3f", ratio) << "; ";
  }
  std::string s = d.str();
  return {ok, s.substr(0, s.size() - 2)};
}

Outcome c7_leakage(Shared& sh) {
  const RunResult& r = sh.spin();
  const auto rows = csv_rows(artifact(r, "qmq_leakage.csv"));
  const SpinQubitParams base;
  const double dtau = make_spin_model(base).delta_tau;
  std::map<double, double> worst_law, worst_pert, last_value;
  double largest = 0.0;
  for (const auto& f : rows) {
    const double dx = std::stod(f[0]);
    const std::size_t n = std::stoul(f[1]);
    const double tau = std::stod(f[2]);
    const double leak = std::stod(f[3]);
    const double law = std::stod(f[4]);
    const double pert = std::stod(f[5]);
    largest = std::max(largest, dx);
    last_value[dx] = leak;
    const double gamma9 = leakage_rate(dx, base.z_r, dtau).value;
    if (tau <= 3.0 / gamma9 && n >= 10) {
      worst_law[dx] = std::max(worst_law[dx], std::abs(leak / law - 1.0));
      worst_pert[dx] = std::max(worst_pert[dx], std::abs(leak / pert - 1.0));
    }
  }
  std::ostringstream d;
  bool ok = true;
  for (const auto& [dx, w] : worst_law) {
    ok = ok && w <= kLeakLawRelTol;
    d << "dx=" << dx << ": max rel dev vs rate law " << fmt("%.3f", w) << " (second-order law "
      << fmt("%.4f", worst_pert[dx]) << "); ";
  }
  const double sat = last_value[largest];
  const bool sat_ok = std::abs(sat - 0.5) / 0.5 <= kLeakSaturationRelTol;
  d << "saturation at dx=" << largest << ": " << fmt("%.4f", sat);
  return {ok && sat_ok, d.str()};
}

Outcome c8_gamma_m(Shared& sh) {
  const json rates = json::parse(artifact(sh.spin(), "qmq_rates.json"));
  double worst = 0.0;
  bool ok = true;
  for (const auto& row : rates["measurement_rate"]) {
    if (!row.contains("ratio_fitted_over_leading")) {
      ok = false;
      continue;
    }
    worst = std::max(worst, std::abs(row["ratio_fitted_over_leading"].get<double>() - 1.0));
  }
  const double r2 = rates["measurement_rate_linear_fit"].value("r_squared", 0.0);
  ok = ok && worst <= kGammaMRelTol && r2 > kGammaMLinearR2;
  return {ok, "max |fit/law - 1| = " + fmt("%.4f", worst) + " over " +
                  std::to_string(rates["measurement_rate"].size()) + " dz values, linear R^2 = " + fmt("%.4f", r2)};
}

Outcome c9_sweetspot() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nrm(0.0, 1.0);
  double worst_spot = 0.0;
  bool scan_ok = true;
  for (int i = 0; i < kSweetSpotPairs; ++i) {
    GTensorPair p;
    for (std::size_t k = 0; k < 9; ++k) {
      p.g[k] = (k % 4 == 0 ? 2.0 : 0.0) + 0.3 * nrm(rng);
      p.g_prime[k] = 0.05 * nrm(rng);
    }
    const SweetSpotResult r = sweet_spot_directions(p);
    double best = 1.0;
    for (const SweetSpot& s : r.spots) {
      const DeltaDecomposition dd = decompose_delta(p, FieldConfig{s.direction, 1.0});
      const double v = dd.delta_x / dd.delta_norm;
      worst_spot = std::max(worst_spot, v);
      best = std::min(best, v);
    }
    const DirectionMap m = direction_sweep(p, 361, 720, 1.0);
    const double grid_min = *std::min_element(m.delta_x_norm.begin(), m.delta_x_norm.end());
    if (grid_min < best) scan_ok = false;
  }
  GTensorPair prop;
  prop.g = {1.9, 0.1, 0.0, 0.2, 2.1, 0.0, 0.0, 0.05, 1.4};
  for (std::size_t k = 0; k < 9; ++k) prop.g_prime[k] = 0.03 * prop.g[k];
  const bool flagged = sweet_spot_directions(prop).degenerate;
  return {worst_spot < kSweetSpotTol && scan_ok && flagged,
          "max dx/|D| at returned directions = " + fmt("%.2e", worst_spot) + ", 0.5 deg scan " +
              (scan_ok ? "finds nothing better" : "beats a returned direction") + ", g' = c g " +
              (flagged ? "flagged degenerate" : "not flagged")};
}

Outcome c10_sme(Shared& sh) {
  const json rep = json::parse(artifact(sh.get("sme-compare", sh.fig2), "qmq_sme.json"));
  std::map<std::string, double> ratio;
  for (const auto& r : rep["rates"]) ratio[r["quantity"].get<std::string>()] = r["ratio"].get<double>();
  const auto& ens = rep["ensemble_dephasing"];
  const double z = ens["z_score"].get<double>();
  const bool ok = std::abs(ratio["gamma_m"] / kSmeRatio - 1.0) <= kSmeRatioTol &&
                  std::abs(ratio["gamma_d"] / kSmeRatio - 1.0) <= kSmeRatioTol &&
                  std::abs(ratio["gamma_rel"] / kSmeRelRatio - 1.0) <= kSmeRelRatioTol && std::abs(z) <= kSmeSigmas;
  return {ok, "ratios Gm " + fmt("%.4f", ratio["gamma_m"]) + ", Gd " + fmt("%.4f", ratio["gamma_d"]) + ", Grel " +
                  fmt("%.4f", ratio["gamma_rel"]) + "; ensemble dephasing " +
                  fmt("%.5f", ens["fitted_rate"].get<double>()) + " vs chi^2/2 = " +
                  fmt("%.5f", ens["expected_chi2_over_2"].get<double>()) + " (z = " + fmt("%.2f", z) + ", " +
                  std::to_string(ens["trajectories"].get<int>()) + " trajectories)"};
}

Outcome c11_protocol(Shared& sh) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ErrorBudget b{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const ErrorBudget e = estimate_error_budget(experiment_probabilities(b)).budget;
    for (double v : {e.leakage_L - b.leakage_L, e.eps_up - b.eps_up, e.eps_down - b.eps_down, e.q1 - b.q1,
                     e.q2 - b.q2})
      worst = std::max(worst, std::abs(v));
  }
  const json rep = json::parse(artifact(sh.get("leakage-experiment", sh.fig3), "qmq_leakage_experiment.json"));
  const double z = rep["z_score"].get<double>();
  return {worst <= kRoundTripTol && std::abs(z) <= kLeakExperimentSigmas,
          "round trip max |diff| = " + fmt("%.1e", worst) + "; L_hat = " +
              fmt("%.5f", rep["estimated_budget"]["leakage_L"].get<double>()) + " vs engine " +
              fmt("%.5f", rep["true_leakage"].get<double>()) + " (z = " + fmt("%.2f", z) + ", " +
              std::to_string(rep["shots"].get<int>()) + " shots)"};
}

Outcome c12_determinism(Shared& sh) {
  std::ostringstream d;
  bool ok = true;
  for (const auto& [scenario, cfg] : {std::pair<std::string, json>{"charge-readout", sh.fig2}, {"spin-readout", sh.fig3}}) {
    const RunResult& base = sh.get(scenario, cfg);
    std::size_t csvs = 0;
    for (int threads : {4, 8}) {
      const RunResult other = run_with_threads(scenario, cfg, threads);
      for (const auto& a : base.artifacts) {
        if (a.name.size() < 4 || a.name.substr(a.name.size() - 4) != ".csv") continue;
        ++csvs;
        bool same = false;
        for (const auto& b : other.artifacts)
          if (b.name == a.name) same = b.content == a.content;
        if (!same) {
          ok = false;
          d << scenario << "/" << a.name << " differs at " << threads << " threads; ";
        }
      }
    }
    d << scenario << ": " << csvs / 2 << " CSV files compared at 1/4/8 threads; ";
  }
  std::string s = d.str();
  return {ok, s.substr(0, s.size() - 2)};
}

}  // namespace

int main() {
  omp_set_num_threads(1);
  Shared shared;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"timestep calibration", c1_timestep},
      {"current mapping", c2_currents},
      {"oracle equivalence", c3_oracle},
      {"t=0 exactness", c4_t0},
      {"relaxation rate", [&] { return c5_relaxation(shared); }},
      {"infidelity minimum", c6_tau_id},
      {"leakage law", [&] { return c7_leakage(shared); }},
      {"measurement-rate shift", [&] { return c8_gamma_m(shared); }},
      {"sweet spots", c9_sweetspot},
      {"SME cross-check", [&] { return c10_sme(shared); }},
      {"protocol round trip", [&] { return c11_protocol(shared); }},
      {"determinism", [&] { return c12_determinism(shared); }},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = kExpectedFailures.count(id) > 0;
    const char* verdict = o.pass ? "PASS" : (known ? "FAIL (known)" : "FAIL");
    if (!o.pass && !known) ++unexpected;
    std::printf("criterion %2d %-12s %s: %s [%.1f s]\n", id, verdict, criteria[i].first, o.detail.c_str(), sec);
    std::fflush(stdout);
  }
  for (int id : kExpectedFailures) {
    if (id >= 1 && id <= static_cast<int>(criteria.size())) continue;
    ++unexpected;
  }
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
