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

#include "qmq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <type_traits>
#include <utility>
#include <vector>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "qmq/constants.hpp"
#include "qmq/errors.hpp"

namespace qmq {

namespace {

// Binomial tails underflow into subnormals, which are very slow on x86. Flushing them to zero
// only touches entries below 2.2e-308; the previous mode is restored on exit.
class FlushSubnormals {
 public:
#if defined(__SSE2__)
  FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushSubnormals() { _mm_setcsr(saved_); }

 private:
  unsigned int saved_;
#else
  FlushSubnormals() = default;
#endif
  FlushSubnormals(const FlushSubnormals&) = delete;
  FlushSubnormals& operator=(const FlushSubnormals&) = delete;
};

// out (+)= a x a^dag for d x d blocks; a_adj holds a^dag, tmp has room for d*d entries.
template <bool Add>
inline void sandwich(const cplx* a, const cplx* a_adj, const cplx* x, cplx* out, cplx* tmp, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      cplx acc = 0.0;
      for (std::size_t l = 0; l < d; ++l) acc += x[i * d + l] * a_adj[l * d + j];
      tmp[i * d + j] = acc;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      cplx acc = 0.0;
      for (std::size_t l = 0; l < d; ++l) acc += a[i * d + l] * tmp[l * d + j];
      if constexpr (Add) {
        out[i * d + j] += acc;
      } else {
        out[i * d + j] = acc;
      }
    }
  }
}

// Same arithmetic with the block size known at compile time.
template <std::size_t D, bool Add>
inline void sandwich_fixed(const cplx* a, const cplx* a_adj, const cplx* x, cplx* out) {
  cplx tmp[D * D];
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < D; ++j) {
      cplx acc = 0.0;
      for (std::size_t l = 0; l < D; ++l) acc += x[i * D + l] * a_adj[l * D + j];
      tmp[i * D + j] = acc;
    }
  }
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < D; ++j) {
      cplx acc = 0.0;
      for (std::size_t l = 0; l < D; ++l) acc += a[i * D + l] * tmp[l * D + j];
      if constexpr (Add) {
        out[i * D + j] += acc;
      } else {
        out[i * D + j] = acc;
      }
    }
  }
}

// X'_k = A0 X_k A0^dag + A1 X_{k-1} A1^dag for one block.
template <std::size_t D>
inline void pascal_block(const cplx* a0, const cplx* a0a, const cplx* a1, const cplx* a1a, const cplx* same,
                         const cplx* lower, cplx* out, cplx* tmp, std::size_t d) {
  if constexpr (D == 0) {
    if (same) {
      sandwich<false>(a0, a0a, same, out, tmp, d);
      if (lower) sandwich<true>(a1, a1a, lower, out, tmp, d);
    } else {
      sandwich<false>(a1, a1a, lower, out, tmp, d);
    }
  } else {
    if (same) {
      sandwich_fixed<D, false>(a0, a0a, same, out);
      if (lower) sandwich_fixed<D, true>(a1, a1a, lower, out);
    } else {
      sandwich_fixed<D, false>(a1, a1a, lower, out);
    }
  }
}

}  // namespace

StepOperators step_operators(const ComplexMatrix& h_tot, double delta_tau) {
  if (!h_tot.is_square() || h_tot.rows() % 2 != 0) {
    throw DomainError("step_operators: total Hamiltonian must be square with an even dimension");
  }
  if (!(delta_tau > 0.0)) throw DomainError("step_operators: delta_tau must be positive");
  const ComplexMatrix u = hermitian_propagator(h_tot, delta_tau);
  const std::size_t d = h_tot.rows() / 2;
  StepOperators s;
  s.dim = d;
  s.m0 = ComplexMatrix(d, d);
  s.m1 = ComplexMatrix(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s.m0(i, j) = u(2 * i, 2 * j);
      s.m1(i, j) = u(2 * i + 1, 2 * j);
    }
  }
  const ComplexMatrix completeness = s.m0.adjoint() * s.m0 + s.m1.adjoint() * s.m1;
  const double err = max_abs_diff(completeness, ComplexMatrix::identity(d));
  if (err > kCompletenessTol) {
    std::ostringstream os;
    os << "step_operators: completeness violated by " << err << " (basis ordering?)";
    throw ConsistencyError(os.str());
  }
  s.upsilon0 = transfer_matrix(s.m0);
  s.upsilon1 = transfer_matrix(s.m1);
  return s;
}

ComplexMatrix CountResolvedChannels::sum() const {
  ComplexMatrix acc(dim * dim, dim * dim);
  for (const auto& c : channels) acc += c;
  return acc;
}

CountResolvedPropagator::CountResolvedPropagator(const StepOperators& step, std::vector<ComplexMatrix> probes,
                                                 std::size_t max_steps, Picture picture)
    : dim_(step.dim), probes_(probes.size()), max_steps_(max_steps) {
  if (probes.empty()) throw DomainError("CountResolvedPropagator: no probe operators");
  for (const auto& p : probes) {
    if (p.rows() != dim_ || p.cols() != dim_) throw DomainError("CountResolvedPropagator: probe dimension mismatch");
  }
  if (picture == Picture::kSchrodinger) {
    a0_ = step.m0;
    a1_ = step.m1;
  } else {
    a0_ = step.m0.adjoint();
    a1_ = step.m1.adjoint();
  }
  const std::size_t block = dim_ * dim_;
  current_.resize(probes_ * block);
  for (std::size_t p = 0; p < probes_; ++p) std::copy(probes[p].data(), probes[p].data() + block, current_.begin() + p * block);
}

const cplx* CountResolvedPropagator::block(std::size_t probe, std::size_t count) const {
  return current_.data() + (count * probes_ + probe) * dim_ * dim_;
}

void CountResolvedPropagator::advance() {
  if (steps_ >= max_steps_) {
    std::ostringstream os;
    os << "count-resolved propagation beyond the configured cap of " << max_steps_ << " steps";
    throw ResourceError(os.str());
  }
  const std::size_t d = dim_;
  const std::size_t block_size = d * d;
  const std::size_t n = steps_;
  const std::size_t stride = probes_ * block_size;
  next_.resize((n + 2) * stride);

  const ComplexMatrix a0_adj = a0_.adjoint();
  const ComplexMatrix a1_adj = a1_.adjoint();
  const cplx* a0 = a0_.data();
  const cplx* a1 = a1_.data();
  const cplx* a0a = a0_adj.data();
  const cplx* a1a = a1_adj.data();
  const cplx* cur = current_.data();
  cplx* nxt = next_.data();
  const long count = static_cast<long>(n + 2);
  const std::size_t probes = probes_;

  auto run = [&](auto fixed) {
    constexpr std::size_t D = decltype(fixed)::value;
#pragma omp parallel
    {
      const FlushSubnormals ftz;
      std::vector<cplx> tmp(block_size);
#pragma omp for schedule(static)
      for (long k = 0; k < count; ++k) {
        const std::size_t ku = static_cast<std::size_t>(k);
        for (std::size_t p = 0; p < probes; ++p) {
          const cplx* same = ku <= n ? cur + ku * stride + p * block_size : nullptr;
          const cplx* lower = ku >= 1 ? cur + (ku - 1) * stride + p * block_size : nullptr;
          pascal_block<D>(a0, a0a, a1, a1a, same, lower, nxt + ku * stride + p * block_size, tmp.data(), d);
        }
      }
    }
  };
  if (d == 2) {
    run(std::integral_constant<std::size_t, 2>{});
  } else if (d == 6) {
    run(std::integral_constant<std::size_t, 6>{});
  } else {
    run(std::integral_constant<std::size_t, 0>{});
  }
  std::swap(current_, next_);
  ++steps_;
}

void CountResolvedPropagator::advance_to(std::size_t n) {
  while (steps_ < n) advance();
}

ComplexMatrix CountResolvedPropagator::conditional(std::size_t probe, std::size_t count) const {
  if (probe >= probes_ || count > steps_) throw DomainError("CountResolvedPropagator: index out of range");
  const cplx* b = block(probe, count);
  return ComplexMatrix(dim_, dim_, std::vector<cplx>(b, b + dim_ * dim_));
}

std::vector<double> CountResolvedPropagator::distribution(std::size_t probe) const {
  if (probe >= probes_) throw DomainError("CountResolvedPropagator: probe out of range");
  std::vector<double> p(steps_ + 1);
  for (std::size_t k = 0; k <= steps_; ++k) {
    const cplx* b = block(probe, k);
    double tr = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) tr += b[i * dim_ + i].real();
    p[k] = tr;
  }
  return p;
}

ComplexMatrix CountResolvedPropagator::aggregate(std::size_t probe, const std::vector<bool>& mask) const {
  if (probe >= probes_) throw DomainError("CountResolvedPropagator: probe out of range");
  if (mask.size() != steps_ + 1) throw DomainError("CountResolvedPropagator: mask length must be N+1");
  ComplexMatrix acc(dim_, dim_);
  for (std::size_t k = 0; k <= steps_; ++k) {
    if (!mask[k]) continue;
    const cplx* b = block(probe, k);
    for (std::size_t i = 0; i < dim_ * dim_; ++i) acc.data()[i] += b[i];
  }
  return acc;
}

ComplexMatrix CountResolvedPropagator::total(std::size_t probe) const {
  return aggregate(probe, std::vector<bool>(steps_ + 1, true));
}

std::vector<ComplexMatrix> matrix_unit_probes(std::size_t d) {
  // column j*d + l of a transfer matrix is the image of |l><j|
  std::vector<ComplexMatrix> units;
  units.reserve(d * d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t l = 0; l < d; ++l) {
      ComplexMatrix e(d, d);
      e(l, j) = 1.0;
      units.push_back(std::move(e));
    }
  }
  return units;
}

CountResolvedChannels channels_from_probes(const CountResolvedPropagator& prop) {
  const std::size_t d = prop.dim();
  const std::size_t n = prop.steps();
  if (prop.probe_count() != d * d) throw DomainError("channels_from_probes: expected the d^2 matrix-unit probes");
  CountResolvedChannels out;
  out.n_steps = n;
  out.dim = d;
  out.channels.assign(n + 1, ComplexMatrix(d * d, d * d));
  for (std::size_t k = 0; k <= n; ++k) {
    for (std::size_t c = 0; c < d * d; ++c) {
      const std::vector<cplx> col = vec(prop.conditional(c, k));
      for (std::size_t r = 0; r < d * d; ++r) out.channels[k](r, c) = col[r];
    }
  }
  return out;
}

CountResolvedChannels evolve_count_resolved(const StepOperators& step, std::size_t n, std::size_t max_steps) {
  if (n < 1) throw DomainError("evolve_count_resolved: n must be at least 1");
  if (n > max_steps) {
    std::ostringstream os;
    os << "evolve_count_resolved: n = " << n << " exceeds the cap of " << max_steps;
    throw ResourceError(os.str());
  }
  CountResolvedPropagator prop(step, matrix_unit_probes(step.dim), max_steps);
  prop.advance_to(n);
  return channels_from_probes(prop);
}

CountResolvedChannels brute_force_channels(const StepOperators& step, std::size_t n) {
  if (n < 1) throw DomainError("brute_force_channels: n must be at least 1");
  if (n > kMaxBruteForceSteps) throw ResourceError("brute_force_channels: 2^n enumeration limited to n <= 14");
  const std::size_t dd = step.dim * step.dim;
  CountResolvedChannels out;
  out.n_steps = n;
  out.dim = step.dim;
  out.channels.assign(n + 1, ComplexMatrix(dd, dd));

  // Product for the string r_1..r_m is Upsilon_{r_m} ... Upsilon_{r_1}.
  std::function<void(const ComplexMatrix&, std::size_t, std::size_t)> descend =
      [&](const ComplexMatrix& product, std::size_t depth, std::size_t weight) {
        if (depth == n) {
          out.channels[weight] += product;
          return;
        }
        descend(step.upsilon0 * product, depth + 1, weight);
        descend(step.upsilon1 * product, depth + 1, weight + 1);
      };
  descend(ComplexMatrix::identity(dd), 0, 0);
  return out;
}

std::vector<double> outcome_distribution(const CountResolvedChannels& channels, const ComplexMatrix& rho) {
  const std::size_t d = channels.dim;
  if (rho.rows() != d || rho.cols() != d) throw DomainError("outcome_distribution: dimension mismatch");
  const std::vector<cplx> v = vec(rho);
  std::vector<double> p(channels.channels.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const std::vector<cplx> out = channels.channels[k] * v;
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += out[i * d + i].real();
    p[k] = tr;
  }
  return p;
}

bool InferenceRule::infers_e(std::size_t count) const {
  const long c = static_cast<long>(count);
  return e_above ? c > cut : c < cut;
}

std::vector<bool> InferenceRule::e_mask() const {
  std::vector<bool> mask(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) mask[k] = infers_e(k);
  return mask;
}

InferenceRule critical_ratio(const std::vector<double>& p_e, const std::vector<double>& p_g) {
  if (p_e.size() != p_g.size() || p_e.empty()) throw DomainError("critical_ratio: distributions must have equal, non-zero length");
  const std::size_t n = p_e.size() - 1;
  const long nl = static_cast<long>(n);

  double mean_e = 0.0;
  double mean_g = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    mean_e += static_cast<double>(k) * p_e[k];
    mean_g += static_cast<double>(k) * p_g[k];
  }
  InferenceRule rule;
  rule.n_steps = n;
  rule.e_above = !(mean_e < mean_g);

  // Likelihood assignment; near-equal likelihoods count as ties and go to g.
  std::vector<bool> ml(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double scale = std::max(std::abs(p_e[k]), std::abs(p_g[k]));
    ml[k] = p_e[k] - p_g[k] > 1e-9 * scale;
  }
  // Position along the oriented axis: index j runs from the deep g side to the deep e side.
  auto count_at = [&](std::size_t j) { return rule.e_above ? j : n - j; };

  std::size_t first_e = n + 1;
  for (std::size_t j = 0; j <= n; ++j) {
    if (ml[count_at(j)]) {
      first_e = j;
      break;
    }
  }
  bool single_cut = true;
  for (std::size_t j = first_e; j <= n; ++j) {
    if (!ml[count_at(j)]) {
      single_cut = false;
      break;
    }
  }

  std::size_t g_len = first_e;  // number of counts on the g side
  if (!single_cut) {
    // best single cut by assignment fidelity
    double e_mass = 0.0;
    for (std::size_t k = 0; k <= n; ++k) e_mass += p_e[k];
    double best = -1.0;
    double g_acc = 0.0;
    double e_acc = e_mass;
    for (std::size_t len = 0; len <= n + 1; ++len) {
      const double fid = 0.5 * (g_acc + e_acc);
      if (fid > best) {
        best = fid;
        g_len = len;
      }
      if (len <= n) {
        g_acc += p_g[count_at(len)];
        e_acc -= p_e[count_at(len)];
      }
    }
    double disagreement = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      const bool cut_e = j >= g_len;
      if (cut_e != ml[count_at(j)]) disagreement += std::abs(p_e[count_at(j)] - p_g[count_at(j)]);
    }
    if (disagreement > 1e-12) {
      rule.threshold_form = false;
      std::ostringstream os;
      os << "likelihood ratio is not monotone in N_t (N = " << n << ", disagreeing mass " << disagreement
         << "); best single cut used";
      rule.warnings.push_back(os.str());
    }
  }

  if (rule.e_above) {
    rule.cut = static_cast<long>(g_len) - 1;
  } else {
    rule.cut = nl - static_cast<long>(g_len) + 1;
  }
  rule.k_critical = n == 0 ? 0.0 : std::clamp(static_cast<double>(rule.cut) / static_cast<double>(n), 0.0, 1.0);
  return rule;
}

MeasurementOperations aggregate_operations(const CountResolvedChannels& channels, const InferenceRule& rule) {
  if (rule.n_steps != channels.n_steps) throw DomainError("aggregate_operations: rule and channels differ in N");
  const std::size_t dd = channels.dim * channels.dim;
  MeasurementOperations ops{ComplexMatrix(dd, dd), ComplexMatrix(dd, dd)};
  for (std::size_t k = 0; k <= channels.n_steps; ++k) {
    if (rule.infers_e(k)) {
      ops.upsilon_e += channels.channels[k];
    } else {
      ops.upsilon_g += channels.channels[k];
    }
  }
  return ops;
}

ComplexMatrix unconditional_step(const StepOperators& step, const ComplexMatrix& rho) {
  return step.m0 * rho * step.m0.adjoint() + step.m1 * rho * step.m1.adjoint();
}

std::vector<ComplexMatrix> unconditional_trajectory(const StepOperators& step, const ComplexMatrix& rho,
                                                    const std::vector<std::size_t>& sample_steps) {
  const std::size_t d = step.dim;
  if (rho.rows() != d || rho.cols() != d) throw DomainError("unconditional_trajectory: dimension mismatch");
  if (!std::is_sorted(sample_steps.begin(), sample_steps.end())) {
    throw DomainError("unconditional_trajectory: sample steps must be ascending");
  }
  const ComplexMatrix m0a = step.m0.adjoint();
  const ComplexMatrix m1a = step.m1.adjoint();
  std::vector<cplx> state(rho.data(), rho.data() + d * d);
  std::vector<cplx> next(d * d);
  std::vector<cplx> tmp(d * d);
  std::vector<ComplexMatrix> out;
  out.reserve(sample_steps.size());
  std::size_t done = 0;
  const FlushSubnormals ftz;
  for (const std::size_t target : sample_steps) {
    for (; done < target; ++done) {
      std::fill(next.begin(), next.end(), cplx{0.0, 0.0});
      sandwich<true>(step.m0.data(), m0a.data(), state.data(), next.data(), tmp.data(), d);
      sandwich<true>(step.m1.data(), m1a.data(), state.data(), next.data(), tmp.data(), d);
      std::swap(state, next);
    }
    out.emplace_back(d, d, state);
  }
  return out;
}

}  // namespace qmq
