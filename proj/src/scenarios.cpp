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

#include "qmq/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qmq/analytics.hpp"
#include "qmq/constants.hpp"
#include "qmq/engine.hpp"
#include "qmq/errors.hpp"
#include "qmq/metrics.hpp"
#include "qmq/models.hpp"
#include "qmq/protocols.hpp"
#include "qmq/sme.hpp"
#include "qmq/sweetspot.hpp"

namespace qmq {

using nlohmann::json;

namespace {

// ---- config access -------------------------------------------------------

const json* lookup(const json& cfg, const std::string& dotted) {
  const json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

double get_double(const json& cfg, const std::string& key, double fallback) {
  const json* v = lookup(cfg, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(key + ": expected a number");
  return v->get<double>();
}

std::size_t get_count(const json& cfg, const std::string& key, std::size_t fallback) {
  const json* v = lookup(cfg, key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<long long>() < 0) throw ConfigError(key + ": expected a non-negative integer");
  return static_cast<std::size_t>(v->get<long long>());
}

std::string get_string(const json& cfg, const std::string& key, const std::string& fallback) {
  const json* v = lookup(cfg, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(key + ": expected a string");
  return v->get<std::string>();
}

bool parse_switch(const std::string& key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "on" || s == "true") return true;
    if (s == "off" || s == "false") return false;
  }
  throw ConfigError(key + ": expected on/off");
}

bool get_switch(const json& cfg, const std::string& key, bool fallback) {
  const json* v = lookup(cfg, key);
  return v ? parse_switch(key, *v) : fallback;
}

std::vector<double> get_list(const json& cfg, const std::string& key, const std::vector<double>& fallback) {
  const json* v = lookup(cfg, key);
  if (!v) return fallback;
  if (v->is_number()) return {v->get<double>()};
  if (!v->is_array()) throw ConfigError(key + ": expected a number or an array of numbers");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) throw ConfigError(key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// ---- formatting ----------------------------------------------------------

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ostringstream out_;
};

json prediction_json(const RatePrediction& r) {
  json j{{"value", r.value}, {"valid", r.valid}};
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

json fit_json(const FitResult& f) {
  return {{"rate", f.rate},           {"residual", f.residual},   {"samples", f.samples},
          {"window_lo_ns", f.window_lo}, {"window_hi_ns", f.window_hi}, {"converged", f.converged}};
}

// ---- parameters and grids ------------------------------------------------

ChargeQubitParams charge_params(const json& cfg) {
  ChargeQubitParams p;
  p.epsilon = get_double(cfg, "charge.epsilon", p.epsilon);
  p.gamma = get_double(cfg, "charge.gamma", p.gamma);
  p.delta_gamma = get_double(cfg, "charge.delta_gamma", p.delta_gamma);
  p.t = 0.0;
  p.validate();
  return p;
}

SpinQubitParams spin_params(const json& cfg) {
  SpinQubitParams p;
  p.epsilon = get_double(cfg, "spin.epsilon", p.epsilon);
  p.t = get_double(cfg, "spin.t", p.t);
  p.U = get_double(cfg, "spin.U", p.U);
  p.z_l = get_double(cfg, "spin.z_l", p.z_l);
  p.z_r = get_double(cfg, "spin.z_r", p.z_r);
  p.gamma = get_double(cfg, "spin.gamma", p.gamma);
  p.delta_gamma = get_double(cfg, "spin.delta_gamma", p.delta_gamma);
  p.validate();
  return p;
}

std::optional<double> optional_dtau(const json& cfg, const std::string& key) {
  const json* v = lookup(cfg, key);
  if (!v) return std::nullopt;
  if (!v->is_number() || !(v->get<double>() > 0.0)) throw ParameterError(key + " must be a positive number");
  return v->get<double>();
}

struct GridPlan {
  std::vector<std::size_t> steps;
  bool streaming = true;
  std::size_t cap = kDefaultMaxSteps;
  double memory_cap_mb = 1024.0;
};

std::vector<std::size_t> parse_grid(const std::string& spec, std::size_t n_max) {
  // "log:MIN:MAX:COUNT", "dense:MAX" or a comma-separated list of step counts
  auto fields = [&](char sep) {
    std::vector<std::string> out;
    std::stringstream ss(spec);
    std::string f;
    while (std::getline(ss, f, sep)) out.push_back(f);
    return out;
  };
  auto to_count = [&](const std::string& s) -> std::size_t {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size() || v < 1) throw std::invalid_argument(s);
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("grid: invalid count '" + s + "' in '" + spec + "'");
    }
  };
  if (spec.rfind("log:", 0) == 0) {
    const auto f = fields(':');
    if (f.size() != 4) throw ConfigError("grid: expected log:MIN:MAX:COUNT");
    return log_grid(to_count(f[1]), to_count(f[2]), to_count(f[3]));
  }
  if (spec.rfind("dense:", 0) == 0) {
    const auto f = fields(':');
    if (f.size() != 2) throw ConfigError("grid: expected dense:MAX");
    return dense_grid(to_count(f[1]));
  }
  if (spec == "dense") return dense_grid(n_max);
  std::vector<std::size_t> out;
  for (const auto& f : fields(',')) out.push_back(to_count(f));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GridPlan grid_plan(const json& cfg, const RunOptions& opt, std::size_t default_max_n) {
  GridPlan g;
  g.cap = get_count(cfg, "run.max_steps_cap", kDefaultMaxSteps);
  g.memory_cap_mb = get_double(cfg, "run.memory_cap_mb", 1024.0);
  g.streaming = opt.streaming ? *opt.streaming : get_switch(cfg, "run.streaming", true);
  const std::size_t n_max = opt.max_n ? *opt.max_n : get_count(cfg, "run.max_n", default_max_n);
  if (n_max < 1) throw ParameterError("run.max_n must be at least 1");
  const std::string spec = opt.grid ? *opt.grid : get_string(cfg, "run.grid", "");
  if (spec.empty()) {
    g.steps = log_grid(std::min<std::size_t>(get_count(cfg, "run.grid_min", 10), n_max), n_max,
                       get_count(cfg, "run.grid_points", 40));
  } else {
    g.steps = parse_grid(spec, n_max);
  }
  if (g.steps.empty()) throw ParameterError("empty step grid");
  return g;
}

// Bytes held by the propagation buffers at the largest N.
double estimated_bytes(std::size_t d, std::size_t n, bool streaming) {
  const double probes = streaming ? 2.0 : static_cast<double>(d * d);
  const double buffers = 2.0 * probes * static_cast<double>(n + 1) * static_cast<double>(d * d) * 16.0;
  const double channels = streaming ? 0.0 : static_cast<double>(n + 1) * std::pow(static_cast<double>(d), 4) * 16.0;
  return buffers + channels;
}

// Complex multiply-adds of the count-resolved recursion up to N.
double estimated_operations(std::size_t d, std::size_t n, bool streaming) {
  const double probes = streaming ? 2.0 : static_cast<double>(d * d);
  const double dn = static_cast<double>(n);
  return probes * 4.0 * std::pow(static_cast<double>(d), 3) * dn * dn / 2.0;
}

void check_resources(const GridPlan& g, std::size_t d) {
  const std::size_t n = g.steps.back();
  if (n > g.cap) {
    throw ResourceError("N = " + std::to_string(n) + " exceeds run.max_steps_cap = " + std::to_string(g.cap));
  }
  const double mb = estimated_bytes(d, n, g.streaming) / (1024.0 * 1024.0);
  if (mb > g.memory_cap_mb) {
    std::string msg = "N = " + std::to_string(n) + " needs about " + num(mb) + " MiB, above run.memory_cap_mb = " +
                      num(g.memory_cap_mb);
    if (!g.streaming) msg += "; use --streaming on to keep only the two benchmark probes";
    throw ResourceError(msg);
  }
}

BenchmarkSeries series_for(const ReadoutModel& model, const GridPlan& g) {
  check_resources(g, model.system_dim);
  return g.streaming ? benchmark_series(model, g.steps, g.cap) : benchmark_series_full(model, g.steps, g.cap);
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double population(const ComplexMatrix& rho, const std::vector<cplx>& v) {
  const std::vector<cplx> rv = rho * v;
  cplx acc{0.0};
  for (std::size_t i = 0; i < v.size(); ++i) acc += std::conj(v[i]) * rv[i];
  return acc.real();
}

std::vector<std::string> unique_warnings(std::vector<std::string> w) {
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());
  return w;
}

// ---- charge readout ------------------------------------------------------

RunResult run_charge_readout(const json& cfg, const RunOptions& opt) {
  const ChargeQubitParams base = charge_params(cfg);
  const std::vector<double> t_values = get_list(cfg, "charge.t", {0.0, 0.1, 0.5, 2.0});
  const std::optional<double> dtau_override = optional_dtau(cfg, "charge.delta_tau");
  const GridPlan grid = grid_plan(cfg, opt, 4000);
  const std::size_t rel_cap = get_count(cfg, "run.relaxation_max_steps", 50000000);
  const std::size_t rel_samples = std::max<std::size_t>(get_count(cfg, "run.relaxation_samples", 200), 10);

  RunResult res;
  CsvWriter inf({"t_ueV", "n_steps", "tau_ns", "infidelity", "eps_up", "eps_down", "k_critical", "trace_drift"});
  CsvWriter mix({"t_ueV", "n_steps", "tau_ns", "mixedness_e", "mixedness_g"});
  CsvWriter rel({"t_ueV", "n_steps", "tau_ns", "population_difference"});
  json rates = json::array();

  for (const double t : t_values) {
    ChargeQubitParams p = base;
    p.t = t;
    const ReadoutModel model = make_charge_model(p, dtau_override);
    const BenchmarkSeries s = series_for(model, grid);
    for (const auto& w : s.warnings) res.warnings.push_back("t=" + num(t) + ": " + w);
    res.max_trace_drift = std::max(res.max_trace_drift, max_of(s.trace_drift));
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      inf.row(t, s.steps[i], s.integration_times[i], s.infidelity[i], s.eps_up[i], s.eps_down[i], s.k_critical[i],
              s.trace_drift[i]);
      mix.row(t, s.steps[i], s.integration_times[i], s.mixedness_e[i], s.mixedness_g[i]);
    }

    const MeasurementRate gm = measurement_rate(p.delta_gamma, model.delta_tau);
    json entry{{"t_ueV", t}, {"delta_tau_ns", model.delta_tau}};
    entry["gamma_m"] = {{"leading", prediction_json(gm.leading)}, {"exact", prediction_json(gm.exact)}};
    try {
      entry["gamma_m"]["fitted"] = fit_json(fit_measurement_rate(s.integration_times, s.infidelity));
    } catch (const FitError& e) {
      entry["gamma_m"]["fit_error"] = e.what();
    }

    const auto best = std::min_element(s.infidelity.begin(), s.infidelity.end());
    const std::size_t at = static_cast<std::size_t>(best - s.infidelity.begin());
    entry["grid_minimum"] = {{"n_steps", s.steps[at]}, {"tau_ns", s.integration_times[at]}, {"infidelity", *best},
                             {"interior", at > 0 && at + 1 < s.steps.size()}};

    if (t != 0.0) {
      const RatePrediction predicted = relaxation_rate_charge(t, p.delta_gamma, p.epsilon, model.delta_tau);
      entry["gamma_rel"] = {{"predicted", prediction_json(predicted)}};
      if (predicted.value > 0.0) {
        const double horizon = 2.5 / predicted.value;
        std::size_t n_rel = static_cast<std::size_t>(std::ceil(horizon / model.delta_tau));
        if (n_rel > rel_cap) {
          res.warnings.push_back("t=" + num(t) + ": relaxation horizon truncated to run.relaxation_max_steps");
          n_rel = rel_cap;
        }
        std::vector<std::size_t> sample_steps;
        for (std::size_t i = 1; i <= rel_samples; ++i) {
          const std::size_t k = std::max<std::size_t>(1, n_rel * i / rel_samples);
          if (sample_steps.empty() || k > sample_steps.back()) sample_steps.push_back(k);
        }
        const StepOperators step = step_operators(model.total_hamiltonian, model.delta_tau);
        const std::vector<ComplexMatrix> states =
            unconditional_trajectory(step, outer(model.e_state), sample_steps);
        std::vector<double> times;
        std::vector<double> diff;
        for (std::size_t i = 0; i < states.size(); ++i) {
          const double tau = static_cast<double>(sample_steps[i]) * model.delta_tau;
          const double d = population(states[i], model.e_state) - population(states[i], model.g_state);
          rel.row(t, sample_steps[i], tau, d);
          if (d > 0.0) {
            times.push_back(tau);
            diff.push_back(d);
          }
        }
        try {
          const FitResult f = fit_decay_rate_windowed(times, diff);
          entry["gamma_rel"]["fitted"] = fit_json(f);
          entry["gamma_rel"]["ratio_fitted_over_predicted"] = f.rate / predicted.value;
        } catch (const FitError& e) {
          entry["gamma_rel"]["fit_error"] = e.what();
        }
        if (predicted.value < 2.0 * gm.leading.value) {
          const IdealIntegrationTime tid = ideal_integration_time(gm.leading.value, predicted.value);
          entry["tau_id"] = {{"closed_form_ns", tid.closed_form}, {"refined_ns", tid.refined}};
        }
      }
    }
    rates.push_back(entry);
  }

  res.artifacts.push_back({opt.prefix + "_infidelity.csv", inf.str()});
  res.artifacts.push_back({opt.prefix + "_mixedness.csv", mix.str()});
  res.artifacts.push_back({opt.prefix + "_relaxation.csv", rel.str()});
  json report{{"scenario", "charge-readout"},
              {"parameters", {{"epsilon_ueV", base.epsilon}, {"gamma_ueV", base.gamma}, {"delta_gamma_ueV", base.delta_gamma}}},
              {"series", rates}};
  res.artifacts.push_back({opt.prefix + "_rates.json", report.dump(2) + "\n"});
  res.summary = {{"t_values", t_values}, {"grid_points", grid.steps.size()}, {"max_n", grid.steps.back()}};
  return res;
}

// ---- spin readout --------------------------------------------------------

RunResult run_spin_readout(const json& cfg, const RunOptions& opt) {
  const SpinQubitParams base = spin_params(cfg);
  const std::vector<double> dz_values = get_list(cfg, "spin.delta_z", {-0.125, -0.075, -0.025, 0.0, 0.025, 0.075, 0.125});
  const std::vector<double> dx_values = get_list(cfg, "spin.delta_x", {0.0125, 0.05, 0.25});
  const GridPlan grid = grid_plan(cfg, opt, 1500);

  RunResult res;
  CsvWriter inf({"delta_z_ueV", "n_steps", "tau_ns", "infidelity", "eps_up", "eps_down", "k_critical", "trace_drift"});
  CsvWriter leak({"delta_x_ueV", "n_steps", "tau_ns", "leakage", "rate_law", "perturbative_law", "trace_drift"});
  json gm_rows = json::array();
  json leak_rows = json::array();

  std::vector<double> xs, ys;
  for (const double dz : dz_values) {
    SpinQubitParams p = base;
    p.delta = {0.0, 0.0, dz};
    const ReadoutModel model = make_spin_model(p);
    for (const auto& w : model.warnings) res.warnings.push_back("delta_z=" + num(dz) + ": " + w);
    const BenchmarkSeries s = series_for(model, grid);
    for (const auto& w : s.warnings) res.warnings.push_back("delta_z=" + num(dz) + ": " + w);
    res.max_trace_drift = std::max(res.max_trace_drift, max_of(s.trace_drift));
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      inf.row(dz, s.steps[i], s.integration_times[i], s.infidelity[i], s.eps_up[i], s.eps_down[i], s.k_critical[i],
              s.trace_drift[i]);
    }
    const MeasurementRate gm = measurement_rate(p.delta_gamma, model.delta_tau, dz);
    json row{{"delta_z_ueV", dz}, {"delta_tau_ns", model.delta_tau}, {"leading", prediction_json(gm.leading)},
             {"exact", prediction_json(gm.exact)}};
    try {
      const FitResult f = fit_measurement_rate(s.integration_times, s.infidelity);
      row["fitted"] = fit_json(f);
      row["ratio_fitted_over_leading"] = f.rate / gm.leading.value;
      xs.push_back(dz);
      ys.push_back(f.rate);
    } catch (const FitError& e) {
      row["fit_error"] = e.what();
    }
    gm_rows.push_back(row);
  }
  json linear = json::object();
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i] / n;
      my += ys[i] / n;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx > 0.0 && syy > 0.0) {
      linear = {{"slope", sxy / sxx}, {"intercept", my - sxy / sxx * mx}, {"r_squared", sxy * sxy / (sxx * syy)}};
    }
  }

  for (const double dx : dx_values) {
    SpinQubitParams p = base;
    p.delta = {dx, 0.0, 0.0};
    const ReadoutModel model = make_spin_model(p);
    for (const auto& w : model.warnings) res.warnings.push_back("delta_x=" + num(dx) + ": " + w);
    const BenchmarkSeries s = series_for(model, grid);
    res.max_trace_drift = std::max(res.max_trace_drift, max_of(s.trace_drift));
    const RatePrediction law = leakage_rate(dx, p.z_r, model.delta_tau);
    const RatePrediction pert = leakage_rate_perturbative(dx, p.z_r, model.delta_tau);
    std::vector<double> times, decay;
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      const double tau = s.integration_times[i];
      leak.row(dx, s.steps[i], tau, s.leakage[i], 0.5 * (1.0 - std::exp(-law.value * tau)),
               0.5 * (1.0 - std::exp(-pert.value * tau)), s.trace_drift[i]);
      if (1.0 - 2.0 * s.leakage[i] > 0.0) {
        times.push_back(tau);
        decay.push_back(1.0 - 2.0 * s.leakage[i]);
      }
    }
    json row{{"delta_x_ueV", dx},
             {"delta_tau_ns", model.delta_tau},
             {"rate_law", prediction_json(law)},
             {"perturbative", prediction_json(pert)}};
    try {
      const FitResult f = fit_decay_rate_windowed(times, decay);
      row["fitted"] = fit_json(f);
      row["ratio_fitted_over_rate_law"] = f.rate / law.value;
      row["ratio_fitted_over_perturbative"] = f.rate / pert.value;
    } catch (const FitError& e) {
      row["fit_error"] = e.what();
    }
    leak_rows.push_back(row);
  }

  if (!dz_values.empty()) res.artifacts.push_back({opt.prefix + "_infidelity.csv", inf.str()});
  if (!dx_values.empty()) res.artifacts.push_back({opt.prefix + "_leakage.csv", leak.str()});
  json report{{"scenario", "spin-readout"},
              {"parameters",
               {{"epsilon_ueV", base.epsilon}, {"U_ueV", base.U}, {"t_ueV", base.t}, {"z_l_ueV", base.z_l},
                {"z_r_ueV", base.z_r}, {"gamma_ueV", base.gamma}, {"delta_gamma_ueV", base.delta_gamma}}},
              {"measurement_rate", gm_rows},
              {"measurement_rate_linear_fit", linear},
              {"leakage_rate", leak_rows}};
  res.artifacts.push_back({opt.prefix + "_rates.json", report.dump(2) + "\n"});
  res.summary = {{"grid_points", grid.steps.size()}, {"max_n", grid.steps.back()}};
  return res;
}

// ---- sweet spot ----------------------------------------------------------

std::pair<std::size_t, std::size_t> parse_direction_grid(const std::string& spec) {
  const auto x = spec.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(spec);
    std::size_t u1 = 0, u2 = 0;
    const std::string a = spec.substr(0, x), b = spec.substr(x + 1);
    const long long nt = std::stoll(a, &u1);
    const long long np = std::stoll(b, &u2);
    if (u1 != a.size() || u2 != b.size() || nt < 2 || np < 2) throw std::invalid_argument(spec);
    return {static_cast<std::size_t>(nt), static_cast<std::size_t>(np)};
  } catch (const std::exception&) {
    throw ConfigError("grid: expected N_THETAxN_PHI with both >= 2, got '" + spec + "'");
  }
}

RunResult run_sweetspot(const json& cfg, const RunOptions& opt) {
  RunResult res;
  std::string g_file = opt.g_file ? *opt.g_file : get_string(cfg, "sweetspot.g_file", "");
  GTensorPair pair;
  json source;
  if (g_file.empty()) {
    pair = synthetic_single_real_pair();
    source = "synthetic";
    res.warnings.push_back("no g-tensor file given; using the built-in synthetic pair");
  } else {
    std::filesystem::path path(g_file);
    if (path.is_relative() && !opt.g_file) path = opt.config_dir / path;
    pair = read_gtensor_pair_csv(path.string());
    source = path.filename().string();
  }
  pair.validate();
  const auto [n_theta, n_phi] = parse_direction_grid(opt.grid ? *opt.grid : get_string(cfg, "sweetspot.grid", "181x360"));
  const double field = get_double(cfg, "sweetspot.field_T", 1.0);
  if (!(field > 0.0)) throw ParameterError("sweetspot.field_T must be positive");

  const SweetSpotResult spots = sweet_spot_directions(pair);
  json list = json::array();
  for (const auto& sp : spots.spots) {
    FieldConfig f;
    f.direction = sp.direction;
    f.magnitude = field;
    const DeltaDecomposition dd = decompose_delta(pair, f);
    const double theta = std::acos(std::clamp(sp.direction[2], -1.0, 1.0)) * 180.0 / kPi;
    double phi = std::atan2(sp.direction[1], sp.direction[0]) * 180.0 / kPi;
    if (phi < 0.0) phi += 360.0;
    list.push_back({{"direction", sp.direction},
                    {"theta_deg", theta},
                    {"phi_deg", phi},
                    {"eigenvalue", sp.eigenvalue},
                    {"delta_x_norm", dd.delta_norm > 0.0 ? dd.delta_x / dd.delta_norm : 0.0},
                    {"delta_z_ueV", dd.delta_z},
                    {"zeeman_ueV", dd.zeeman_energy}});
  }

  const DirectionMap map = direction_sweep(pair, n_theta, n_phi, field);
  CsvWriter csv({"theta_deg", "phi_deg", "delta_x_norm", "delta_z_norm", "delta_x_ueV", "delta_z_ueV", "zeeman_ueV"});
  for (std::size_t i = 0; i < map.theta_deg.size(); ++i) {
    csv.row(map.theta_deg[i], map.phi_deg[i], map.delta_x_norm[i], map.delta_z_norm[i], map.delta_x[i], map.delta_z[i],
            map.zeeman[i]);
  }
  json report{{"scenario", "sweetspot"},
              {"source", source},
              {"g", pair.g},
              {"g_prime", pair.g_prime},
              {"field_T", field},
              {"sweet_spots", list},
              {"real_eigenvalue_count", spots.real_eigenvalue_count},
              {"discriminant", spots.discriminant},
              {"degenerate", spots.degenerate},
              {"notes", spots.notes}};
  res.artifacts.push_back({opt.prefix + "_map.csv", csv.str()});
  res.artifacts.push_back({opt.prefix + "_sweetspot.json", report.dump(2) + "\n"});
  res.summary = {{"n_theta", n_theta}, {"n_phi", n_phi}, {"sweet_spots", spots.spots.size()}};
  return res;
}

// ---- SME comparison ------------------------------------------------------

struct SmeRun {
  SmeParams params;
  double dt = 0.0;
  double duration = 0.0;
  std::size_t record_every = 1;
  std::size_t trajectories = 0;
  std::size_t batches = 0;
};

SmeRun sme_run(const json& cfg, const ChargeQubitParams& qubit, double delta_tau) {
  SmeRun r;
  r.params = match_parameters(qubit, delta_tau);
  const double cap = max_sme_timestep(r.params);
  r.dt = get_double(cfg, "sme.dt", cap);
  if (r.dt > cap * (1.0 + 1e-12)) {
    throw ParameterError("sme.dt = " + num(r.dt) + " ns exceeds 0.01/max(D, D') = " + num(cap) + " ns");
  }
  const double gd = 0.5 * r.params.chi * r.params.chi;
  r.duration = get_double(cfg, "sme.duration", gd > 0.0 ? 1.5 / gd : 10.0);
  const std::size_t samples = std::max<std::size_t>(get_count(cfg, "sme.samples", 40), 5);
  r.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r.duration / r.dt)) / samples);
  r.trajectories = get_count(cfg, "sme.trajectories", 2000);
  r.batches = std::max<std::size_t>(2, get_count(cfg, "sme.batches", 20));
  if (r.trajectories < r.batches) throw ParameterError("sme.trajectories must be at least sme.batches");
  return r;
}

// Decay rate of |<sigma_x> + i<sigma_y>| over a set of trajectories.
double coherence_decay_rate(const Ensemble& ens, std::size_t first, std::size_t last) {
  std::vector<double> times, values;
  for (std::size_t s = 1; s < ens.times.size(); ++s) {
    cplx c{0.0};
    for (std::size_t tr = first; tr < last; ++tr) {
      const QubitState& psi = ens.states[tr][s];
      c += 2.0 * std::conj(psi[0]) * psi[1];
    }
    c /= static_cast<double>(last - first);
    if (std::abs(c) > 0.0) {
      times.push_back(ens.times[s]);
      values.push_back(std::abs(c));
    }
  }
  return fit_decay_rate(times, values).rate;
}

RunResult run_sme_compare(const json& cfg, const RunOptions& opt) {
  ChargeQubitParams qubit = charge_params(cfg);
  qubit.t = get_double(cfg, "sme.t", 2.0);
  qubit.validate();
  const std::optional<double> dtau_override = optional_dtau(cfg, "charge.delta_tau");
  const double delta_tau = dtau_override ? *dtau_override : calibrate_timestep(qubit.gamma, qubit.delta_gamma, 0.0);
  const std::uint64_t seed = opt.seed ? *opt.seed : get_count(cfg, "run.seed", 1);

  RunResult res;
  const std::vector<RateComparison> table = compare_rates(qubit, delta_tau);
  CsvWriter rates({"quantity", "sme_per_ns", "qmq_per_ns", "ratio", "qmq_valid"});
  json rows = json::array();
  for (const auto& r : table) {
    rates.row(r.name, r.sme, r.qmq, r.ratio, std::string(r.qmq_valid ? "true" : "false"));
    rows.push_back({{"quantity", r.name}, {"sme", r.sme}, {"qmq", r.qmq}, {"ratio", r.ratio}, {"qmq_valid", r.qmq_valid}});
  }

  // Ensemble dephasing check at t = 0 from (|L> + |R>)/sqrt(2).
  ChargeQubitParams pure = qubit;
  pure.t = 0.0;
  const SmeRun run = sme_run(cfg, pure, delta_tau);
  for (const auto& w : run.params.warnings) res.warnings.push_back(w);
  const QubitState plus{cplx{std::sqrt(0.5)}, cplx{std::sqrt(0.5)}};
  const Ensemble ens =
      simulate_ensemble(run.params, plus, run.dt, run.duration, run.record_every, run.trajectories, seed);
  const double rate = coherence_decay_rate(ens, 0, ens.states.size());
  std::vector<double> batch_rates;
  const std::size_t per = run.trajectories / run.batches;
  for (std::size_t b = 0; b < run.batches; ++b) batch_rates.push_back(coherence_decay_rate(ens, b * per, (b + 1) * per));
  double mean = 0.0, var = 0.0;
  for (double r : batch_rates) mean += r / static_cast<double>(batch_rates.size());
  for (double r : batch_rates) var += (r - mean) * (r - mean) / static_cast<double>(batch_rates.size() - 1);
  const double stderr_rate = std::sqrt(var / static_cast<double>(batch_rates.size()));
  const double expected = 0.5 * run.params.chi * run.params.chi;

  CsvWriter ens_csv({"time_ns", "rho_LL", "re_rho_LR", "im_rho_LR", "rho_RR", "mean_cumulative_jumps"});
  for (std::size_t s = 0; s < ens.times.size(); ++s) {
    const ComplexMatrix rho = ensemble_density(ens, s);
    double jumps = 0.0;
    for (const auto& j : ens.cumulative_jumps) jumps += static_cast<double>(j[s]);
    jumps /= static_cast<double>(std::max<std::size_t>(1, ens.cumulative_jumps.size()));
    ens_csv.row(ens.times[s], rho(0, 0).real(), rho(0, 1).real(), rho(0, 1).imag(), rho(1, 1).real(), jumps);
  }

  // One trajectory of the relaxing qubit, started in |L>.
  const SmeParams relaxing = match_parameters(qubit, delta_tau);
  const Trajectory traj = simulate_trajectory(relaxing, {cplx{1.0}, cplx{0.0}}, run.dt, run.duration, seed,
                                              run.trajectories, run.record_every);
  CsvWriter traj_csv({"time_ns", "re_psi_L", "im_psi_L", "re_psi_R", "im_psi_R", "cumulative_jumps"});
  std::size_t jumps = 0;
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    while (jumps < traj.jump_times.size() && traj.jump_times[jumps] <= traj.times[s] + 0.5 * run.dt) ++jumps;
    const QubitState& psi = traj.states[s];
    traj_csv.row(traj.times[s], psi[0].real(), psi[0].imag(), psi[1].real(), psi[1].imag(), jumps);
  }

  json report{{"scenario", "sme-compare"},
              {"parameters",
               {{"epsilon_ueV", qubit.epsilon}, {"t_ueV", qubit.t}, {"gamma_ueV", qubit.gamma},
                {"delta_gamma_ueV", qubit.delta_gamma}, {"delta_tau_ns", delta_tau}}},
              {"matched",
               {{"D_per_ns", run.params.d_rate}, {"D_prime_per_ns", run.params.d_prime_rate}, {"T", run.params.t_amp},
                {"chi", run.params.chi}, {"chi_consistent", run.params.chi_consistent}}},
              {"rates", rows},
              {"ensemble_dephasing",
               {{"trajectories", run.trajectories}, {"dt_ns", run.dt}, {"duration_ns", run.duration},
                {"seed", seed}, {"fitted_rate", rate}, {"batch_mean_rate", mean}, {"standard_error", stderr_rate},
                {"expected_chi2_over_2", expected},
                {"z_score", stderr_rate > 0.0 ? (rate - expected) / stderr_rate : 0.0}}}};
  res.artifacts.push_back({opt.prefix + "_sme_rates.csv", rates.str()});
  res.artifacts.push_back({opt.prefix + "_sme_ensemble.csv", ens_csv.str()});
  res.artifacts.push_back({opt.prefix + "_sme_trajectory.csv", traj_csv.str()});
  res.artifacts.push_back({opt.prefix + "_sme.json", report.dump(2) + "\n"});
  res.summary = {{"trajectories", run.trajectories}, {"seed", seed}};
  return res;
}

// ---- leakage experiment --------------------------------------------------

RunResult run_leakage_experiment(const json& cfg, const RunOptions& opt) {
  SpinQubitParams p = spin_params(cfg);
  p.delta = {get_double(cfg, "leakage_experiment.delta_x", 0.05), 0.0, 0.0};
  LeakageExperimentConfig c;
  c.n_steps_per_round = opt.max_n ? *opt.max_n : get_count(cfg, "leakage_experiment.n_steps_per_round", 1500);
  c.shots = get_count(cfg, "leakage_experiment.shots", 10000);
  c.q1 = get_double(cfg, "leakage_experiment.q1", 0.0);
  c.q2 = get_double(cfg, "leakage_experiment.q2", 0.0);
  c.seed = opt.seed ? *opt.seed : get_count(cfg, "run.seed", 1);
  if (c.n_steps_per_round > get_count(cfg, "run.max_steps_cap", kDefaultMaxSteps)) {
    throw ResourceError("n_steps_per_round exceeds run.max_steps_cap");
  }
  const LeakageExperimentResult r = simulate_leakage_experiment(p, c);
  RunResult res;
  res.warnings = r.warnings;
  const ErrorBudget& b = r.estimate.budget;
  json report{{"scenario", "leakage-experiment"},
              {"delta_x_ueV", p.delta[0]},
              {"n_steps_per_round", r.n_steps_per_round},
              {"integration_time_ns", r.integration_time},
              {"shots", r.shots},
              {"seed", c.seed},
              {"injected", {{"q1", c.q1}, {"q2", c.q2}}},
              {"p00", r.observed.p00},
              {"p01", r.observed.p01},
              {"p10", r.observed.p10},
              {"p11", r.observed.p11},
              {"p0_du", r.observed.p0_du},
              {"p0_ud", r.observed.p0_ud},
              {"estimated_budget",
               {{"leakage_L", b.leakage_L}, {"eps_up", b.eps_up}, {"eps_down", b.eps_down}, {"q1", b.q1}, {"q2", b.q2}}},
              {"clipped", r.estimate.clipped},
              {"true_leakage", r.true_leakage},
              {"leakage_standard_error", r.leakage_standard_error},
              {"z_score", r.leakage_standard_error > 0.0
                              ? (r.observed.p01 - r.observed.p10 - r.true_leakage) / r.leakage_standard_error
                              : 0.0},
              {"rule", {{"cut", r.rule.cut}, {"e_above", r.rule.e_above}, {"k_critical", r.rule.k_critical}}},
              {"engine_eps_up", r.p1_given_dd},
              {"engine_eps_down", 1.0 - r.p1_given_s02}};
  res.artifacts.push_back({opt.prefix + "_leakage_experiment.json", report.dump(2) + "\n"});
  res.summary = {{"shots", r.shots}, {"seed", c.seed}};
  return res;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"charge-readout", "spin-readout", "sweetspot", "sme-compare",
                                              "leakage-experiment"};
  return names;
}

RunResult run_scenario(const std::string& scenario, const json& config, const RunOptions& options) {
  RunResult r;
  if (scenario == "charge-readout") r = run_charge_readout(config, options);
  else if (scenario == "spin-readout") r = run_spin_readout(config, options);
  else if (scenario == "sweetspot") r = run_sweetspot(config, options);
  else if (scenario == "sme-compare") r = run_sme_compare(config, options);
  else if (scenario == "leakage-experiment") r = run_leakage_experiment(config, options);
  else throw ConfigError("unknown scenario '" + scenario + "'");
  r.warnings = unique_warnings(std::move(r.warnings));
  return r;
}

json validate_scenario(const std::string& scenario, const json& config, const RunOptions& options) {
  json report{{"scenario", scenario}, {"status", "OK"}};
  json warnings = json::array();
  auto readout_estimate = [&](std::size_t d, std::size_t runs, std::size_t default_max_n) {
    const GridPlan g = grid_plan(config, options, default_max_n);
    check_resources(g, d);
    const std::size_t n = g.steps.back();
    report["max_n"] = n;
    report["grid_points"] = g.steps.size();
    report["streaming"] = g.streaming;
    report["estimated_memory_mb"] = estimated_bytes(d, n, g.streaming) / (1024.0 * 1024.0);
    // about 2 ns per complex multiply-add on one core
    report["estimated_seconds"] = 2e-9 * estimated_operations(d, n, g.streaming) * static_cast<double>(runs);
  };
  if (scenario == "charge-readout") {
    const ChargeQubitParams p = charge_params(config);
    const auto ts = get_list(config, "charge.t", {0.0, 0.1, 0.5, 2.0});
    optional_dtau(config, "charge.delta_tau");
    readout_estimate(2, ts.size(), 4000);
    report["delta_tau_ns"] = calibrate_timestep(p.gamma, p.delta_gamma, 0.0);
  } else if (scenario == "spin-readout") {
    const SpinQubitParams p = spin_params(config);
    for (const auto& w : p.validate()) warnings.push_back(w);
    const auto dz = get_list(config, "spin.delta_z", {-0.125, -0.075, -0.025, 0.0, 0.025, 0.075, 0.125});
    const auto dx = get_list(config, "spin.delta_x", {0.0125, 0.05, 0.25});
    readout_estimate(spin::kDim, dz.size() + dx.size(), 1500);
  } else if (scenario == "sweetspot") {
    const std::string g_file = options.g_file ? *options.g_file : get_string(config, "sweetspot.g_file", "");
    GTensorPair pair = synthetic_single_real_pair();
    if (!g_file.empty()) {
      std::filesystem::path path(g_file);
      if (path.is_relative() && !options.g_file) path = options.config_dir / path;
      pair = read_gtensor_pair_csv(path.string());
    }
    pair.validate();
    const auto [nt, np] =
        parse_direction_grid(options.grid ? *options.grid : get_string(config, "sweetspot.grid", "181x360"));
    report["directions"] = nt * np;
  } else if (scenario == "sme-compare") {
    ChargeQubitParams q = charge_params(config);
    q.t = get_double(config, "sme.t", 2.0);
    q.validate();
    const double dtau = calibrate_timestep(q.gamma, q.delta_gamma, 0.0);
    const SmeRun run = sme_run(config, q, dtau);
    for (const auto& w : run.params.warnings) warnings.push_back(w);
    const double steps = run.duration / run.dt * static_cast<double>(run.trajectories + 1);
    report["trajectory_steps"] = steps;
    report["estimated_seconds"] = 3e-8 * steps;
  } else if (scenario == "leakage-experiment") {
    spin_params(config);
    const std::size_t n =
        options.max_n ? *options.max_n : get_count(config, "leakage_experiment.n_steps_per_round", 1500);
    if (n > get_count(config, "run.max_steps_cap", kDefaultMaxSteps)) {
      throw ResourceError("n_steps_per_round exceeds run.max_steps_cap");
    }
    ErrorBudget b;
    b.q1 = get_double(config, "leakage_experiment.q1", 0.0);
    b.q2 = get_double(config, "leakage_experiment.q2", 0.0);
    for (const auto& w : b.validate()) warnings.push_back(w);
    prepared_down_up(b.q1, b.q2);
    const std::size_t shots = get_count(config, "leakage_experiment.shots", 10000);
    if (shots < 100) warnings.push_back("fewer than 100 shots; frequencies are statistically weak");
    report["estimated_memory_mb"] = estimated_bytes(spin::kDim, n, true) * 2.0 / (1024.0 * 1024.0);
    report["estimated_seconds"] = 2e-9 * estimated_operations(spin::kDim, n, true) * 2.0;
  } else {
    throw ConfigError("unknown scenario '" + scenario + "'");
  }
  report["warnings"] = warnings;
  return report;
}

json options_to_json(const RunOptions& o) {
  json j{{"threads", o.threads}, {"prefix", o.prefix}};
  if (o.seed) j["seed"] = *o.seed;
  if (o.max_n) j["max_n"] = *o.max_n;
  if (o.streaming) j["streaming"] = *o.streaming ? "on" : "off";
  if (o.grid) j["grid"] = *o.grid;
  if (o.g_file) j["g_file"] = *o.g_file;
  return j;
}

RunOptions options_from_json(const json& j, RunOptions base) {
  if (!j.is_object()) throw ConfigError("manifest options must be a table");
  if (j.contains("threads") && base.threads == 0) base.threads = j["threads"].get<int>();
  if (j.contains("seed") && !base.seed) base.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("max_n") && !base.max_n) base.max_n = j["max_n"].get<std::size_t>();
  if (j.contains("streaming") && !base.streaming) base.streaming = parse_switch("streaming", j["streaming"]);
  if (j.contains("grid") && !base.grid) base.grid = j["grid"].get<std::string>();
  if (j.contains("g_file") && !base.g_file) base.g_file = j["g_file"].get<std::string>();
  return base;
}

}  // namespace qmq
