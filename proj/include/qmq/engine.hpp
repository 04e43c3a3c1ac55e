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

#include "qmq/linalg.hpp"

namespace qmq {

inline constexpr std::size_t kDefaultMaxSteps = 20000;
inline constexpr std::size_t kMaxBruteForceSteps = 14;

// Single indirect measurement: M0 = <.,B|U|.,B>, M1 = <.,T|U|.,B>.
struct StepOperators {
  ComplexMatrix m0;
  ComplexMatrix m1;
  ComplexMatrix upsilon0;
  ComplexMatrix upsilon1;
  std::size_t dim = 0;
};

// H_tot over system (x) meter with the meter as the last factor.
// Throws ConsistencyError if M0^dag M0 + M1^dag M1 deviates from I by more than 1e-8.
StepOperators step_operators(const ComplexMatrix& h_tot, double delta_tau);

// Upsilon_k^(N) for N_t = k = 0..N.
struct CountResolvedChannels {
  std::size_t n_steps = 0;
  std::size_t dim = 0;
  std::vector<ComplexMatrix> channels;

  ComplexMatrix sum() const;
};

enum class Picture { kSchrodinger, kHeisenberg };

// Count-resolved propagation of a set of probe operators X through
//   X_k <- M0 X_k M0^dag + M1 X_{k-1} M1^dag        (Schrodinger)
//   X_k <- M0^dag X_k M0 + M1^dag X_{k-1} M1        (Heisenberg)
// Propagating the d^2 matrix units reproduces Upsilon_k^(N) column by column;
// propagating one density matrix gives the unnormalized conditional states.
// Rounds are data-parallel over k; each k is computed by one thread with a fixed
// operation order, so results do not depend on the thread count.
class CountResolvedPropagator {
 public:
  CountResolvedPropagator(const StepOperators& step, std::vector<ComplexMatrix> probes,
                          std::size_t max_steps = kDefaultMaxSteps, Picture picture = Picture::kSchrodinger);

  void advance();
  void advance_to(std::size_t n);

  std::size_t steps() const { return steps_; }
  std::size_t dim() const { return dim_; }
  std::size_t probe_count() const { return probes_; }

  ComplexMatrix conditional(std::size_t probe, std::size_t count) const;
  // Real part of the trace of each X_k, k = 0..N.
  std::vector<double> distribution(std::size_t probe) const;
  // Sum over k with mask[k] true, accumulated in ascending k.
  ComplexMatrix aggregate(std::size_t probe, const std::vector<bool>& mask) const;
  ComplexMatrix total(std::size_t probe) const;

 private:
  const cplx* block(std::size_t probe, std::size_t count) const;

  std::size_t dim_;
  std::size_t probes_;
  std::size_t max_steps_;
  std::size_t steps_ = 0;
  ComplexMatrix a0_;  // operator applied on the left for outcome 0
  ComplexMatrix a1_;
  std::vector<cplx> current_;
  std::vector<cplx> next_;
};

// The d^2 matrix units |l><j|, ordered so that probe j*d + l is column j*d + l
// of a transfer matrix.
std::vector<ComplexMatrix> matrix_unit_probes(std::size_t d);
// Channels at the propagator's current N; requires matrix_unit_probes.
CountResolvedChannels channels_from_probes(const CountResolvedPropagator& prop);

// Pascal-tree recursion over N rounds. Throws ResourceError if n exceeds max_steps.
CountResolvedChannels evolve_count_resolved(const StepOperators& step, std::size_t n,
                                            std::size_t max_steps = kDefaultMaxSteps);

// Literal enumeration of all 2^n outcome strings with transfer-matrix products.
// Throws ResourceError for n > 14.
CountResolvedChannels brute_force_channels(const StepOperators& step, std::size_t n);

std::vector<double> outcome_distribution(const CountResolvedChannels& channels, const ComplexMatrix& rho);

// Maximum-likelihood single-cut rule. The side holding outcome e is chosen from
// the distribution means; ties and the boundary count go to g.
struct InferenceRule {
  std::size_t n_steps = 0;
  long cut = 0;          // boundary count, always inferred g
  bool e_above = true;   // e iff N_t > cut (true) or N_t < cut (false)
  double k_critical = 0.0;
  bool threshold_form = true;  // false if the likelihood assignment is not a single cut
  std::vector<std::string> warnings;

  bool infers_e(std::size_t count) const;
  std::vector<bool> e_mask() const;
};

InferenceRule critical_ratio(const std::vector<double>& p_e, const std::vector<double>& p_g);

struct MeasurementOperations {
  ComplexMatrix upsilon_g;
  ComplexMatrix upsilon_e;
};

MeasurementOperations aggregate_operations(const CountResolvedChannels& channels, const InferenceRule& rule);

// One round of the unconditional channel rho <- M0 rho M0^dag + M1 rho M1^dag.
ComplexMatrix unconditional_step(const StepOperators& step, const ComplexMatrix& rho);

// States of the unconditional evolution after each step count in sample_steps
// (ascending). Equals the count-resolved sum, computed without resolving counts.
std::vector<ComplexMatrix> unconditional_trajectory(const StepOperators& step, const ComplexMatrix& rho,
                                                    const std::vector<std::size_t>& sample_steps);

}  // namespace qmq
