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

#include "qmq/sweetspot.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "qmq/constants.hpp"
#include "qmq/errors.hpp"

namespace qmq {

Mat3 mat3_multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
  return c;
}

Vec3 mat3_apply(const Mat3& a, const Vec3& v) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out[i] += a[i * 3 + k] * v[k];
  return out;
}

double mat3_determinant(const Mat3& a) {
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) + a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Mat3 mat3_inverse(const Mat3& a) {
  const double det = mat3_determinant(a);
  if (!(std::abs(det) > 1e-9)) throw DomainError("g-tensor is singular");
  Mat3 inv{};
  inv[0] = (a[4] * a[8] - a[5] * a[7]) / det;
  inv[1] = (a[2] * a[7] - a[1] * a[8]) / det;
  inv[2] = (a[1] * a[5] - a[2] * a[4]) / det;
  inv[3] = (a[5] * a[6] - a[3] * a[8]) / det;
  inv[4] = (a[0] * a[8] - a[2] * a[6]) / det;
  inv[5] = (a[2] * a[3] - a[0] * a[5]) / det;
  inv[6] = (a[3] * a[7] - a[4] * a[6]) / det;
  inv[7] = (a[1] * a[6] - a[0] * a[7]) / det;
  inv[8] = (a[0] * a[4] - a[1] * a[3]) / det;
  return inv;
}

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void GTensorPair::validate() const {
  if (!(std::abs(mat3_determinant(g)) > 1e-9)) throw DomainError("g-tensor is singular (|det g| <= 1e-9)");
}

FieldConfig FieldConfig::from_angles(double theta_deg, double phi_deg, double magnitude) {
  const double th = theta_deg * kPi / 180.0;
  const double ph = phi_deg * kPi / 180.0;
  return FieldConfig{{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)}, magnitude};
}

Vec3 coupling_vector(const GTensorPair& pair, const FieldConfig& field) {
  Vec3 b{};
  for (int i = 0; i < 3; ++i) b[i] = field.direction[i] * field.magnitude;
  Vec3 d = mat3_apply(pair.g_prime, b);
  for (auto& x : d) x *= 0.5 * kMuB;
  return d;
}

DeltaDecomposition decompose_delta(const GTensorPair& pair, const FieldConfig& field) {
  Vec3 b{};
  for (int i = 0; i < 3; ++i) b[i] = field.direction[i] * field.magnitude;
  const Vec3 gb = mat3_apply(pair.g, b);
  const double gb_norm = norm3(gb);
  if (!(gb_norm > 0.0)) throw DomainError("decompose_delta: |g B| vanishes, quantization axis undefined");
  DeltaDecomposition out;
  for (int i = 0; i < 3; ++i) out.axis[i] = gb[i] / gb_norm;
  const Vec3 delta = coupling_vector(pair, field);
  out.delta_z = delta[0] * out.axis[0] + delta[1] * out.axis[1] + delta[2] * out.axis[2];
  Vec3 perp{};
  for (int i = 0; i < 3; ++i) perp[i] = delta[i] - out.delta_z * out.axis[i];
  out.delta_x = norm3(perp);
  out.delta_norm = norm3(delta);
  out.zeeman_energy = kMuB * gb_norm;
  return out;
}

namespace {

using cd = std::complex<double>;

// Roots of l^3 + a l^2 + b l + c.
std::array<cd, 3> cubic_roots(double a, double b, double c) {
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const cd disc = std::sqrt(cd(q * q / 4.0 + p * p * p / 27.0));
  cd u3 = -q / 2.0 + disc;
  if (std::abs(u3) < std::abs(-q / 2.0 - disc)) u3 = -q / 2.0 - disc;
  std::array<cd, 3> roots{};
  const cd omega(-0.5, std::sqrt(3.0) / 2.0);
  if (std::abs(u3) == 0.0) {
    roots = {cd(-a / 3.0), cd(-a / 3.0), cd(-a / 3.0)};
    return roots;
  }
  cd u = std::pow(u3, 1.0 / 3.0);
  for (int k = 0; k < 3; ++k) {
    roots[k] = u - p / (3.0 * u) - a / 3.0;
    u *= omega;
  }
  return roots;
}

// Null space of a 3x3 real matrix via Gaussian elimination with complete pivoting.
std::vector<Vec3> null_space(Mat3 m, double tol) {
  int col_perm[3] = {0, 1, 2};
  int rank = 0;
  for (int step = 0; step < 3; ++step) {
    int pr = -1;
    int pc = -1;
    double best = 0.0;
    for (int i = step; i < 3; ++i)
      for (int j = step; j < 3; ++j)
        if (std::abs(m[i * 3 + j]) > best) {
          best = std::abs(m[i * 3 + j]);
          pr = i;
          pc = j;
        }
    if (best <= tol) break;
    for (int j = 0; j < 3; ++j) std::swap(m[step * 3 + j], m[pr * 3 + j]);
    for (int i = 0; i < 3; ++i) std::swap(m[i * 3 + step], m[i * 3 + pc]);
    std::swap(col_perm[step], col_perm[pc]);
    for (int i = step + 1; i < 3; ++i) {
      const double f = m[i * 3 + step] / m[step * 3 + step];
      for (int j = step; j < 3; ++j) m[i * 3 + j] -= f * m[step * 3 + j];
    }
    ++rank;
  }
  std::vector<Vec3> basis;
  // free variables are the permuted columns rank..2
  for (int free = rank; free < 3; ++free) {
    double y[3] = {0.0, 0.0, 0.0};
    y[free] = 1.0;
    for (int i = rank - 1; i >= 0; --i) {
      double acc = 0.0;
      for (int j = i + 1; j < 3; ++j) acc += m[i * 3 + j] * y[j];
      y[i] = -acc / m[i * 3 + i];
    }
    Vec3 v{};
    for (int j = 0; j < 3; ++j) v[col_perm[j]] = y[j];
    basis.push_back(v);
  }
  // Gram-Schmidt within the null space
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double dot = basis[i][0] * basis[j][0] + basis[i][1] * basis[j][1] + basis[i][2] * basis[j][2];
      for (int k = 0; k < 3; ++k) basis[i][k] -= dot * basis[j][k];
    }
    const double n = norm3(basis[i]);
    for (auto& x : basis[i]) x /= n;
  }
  return basis;
}

Vec3 canonical_sign(Vec3 v) {
  int imax = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (v[imax] < 0.0)
    for (auto& x : v) x = -x;
  return v;
}

}  // namespace

SweetSpotResult sweet_spot_directions(const GTensorPair& pair) {
  pair.validate();
  const Mat3 a = mat3_multiply(mat3_inverse(pair.g), pair.g_prime);
  const double tr = a[0] + a[4] + a[8];
  const double minors = a[0] * a[4] - a[1] * a[3] + a[0] * a[8] - a[2] * a[6] + a[4] * a[8] - a[5] * a[7];
  const double det = mat3_determinant(a);
  // lambda^3 - tr lambda^2 + minors lambda - det
  const double cb = -tr;
  const double cc = minors;
  const double cdd = -det;

  SweetSpotResult out;
  out.discriminant = 18.0 * cb * cc * cdd - 4.0 * cb * cb * cb * cdd + cb * cb * cc * cc - 4.0 * cc * cc * cc -
                     27.0 * cdd * cdd;

  const auto roots = cubic_roots(cb, cc, cdd);
  double lmax = 0.0;
  for (const auto& r : roots) lmax = std::max(lmax, std::abs(r));
  const double scale = std::max(lmax, 1e-300);

  // A multiple of the identity: a triple root that Cardano only resolves to ~eps^(1/3).
  double off = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) off = std::max(off, std::abs(a[i * 3 + j] - (i == j ? tr / 3.0 : 0.0)));
  double anorm = 0.0;
  for (double x : a) anorm = std::max(anorm, std::abs(x));
  if (off <= 1e-10 * std::max(anorm, 1e-300)) {
    out.degenerate = true;
    out.real_eigenvalue_count = 3;
    out.notes.push_back("g^-1 g' is proportional to the identity: every direction is a sweet spot");
    out.spots = {{{1.0, 0.0, 0.0}, tr / 3.0}, {{0.0, 1.0, 0.0}, tr / 3.0}, {{0.0, 0.0, 1.0}, tr / 3.0}};
    return out;
  }

  std::vector<double> real_roots;
  for (const auto& r : roots) {
    const bool real = std::abs(r.imag()) < 1e-9 * scale;
    // a conjugate pair this close to the axis is a double root split by rounding
    const bool near_double = !real && std::abs(r.imag()) < 1e-6 * scale;
    if (near_double) {
      if (r.imag() > 0.0) {
        out.degenerate = true;
        real_roots.push_back(r.real());
        real_roots.push_back(r.real());
      }
      continue;
    }
    if (real) {
      double x = r.real();
      // Newton polish on the characteristic polynomial
      for (int it = 0; it < 3; ++it) {
        const double f = ((x + cb) * x + cc) * x + cdd;
        const double df = (3.0 * x + 2.0 * cb) * x + cc;
        if (df == 0.0) break;
        const double nx = x - f / df;
        if (!std::isfinite(nx) || std::abs(nx - x) > 1e-6 * scale) break;
        x = nx;
      }
      real_roots.push_back(x);
    }
  }
  std::sort(real_roots.begin(), real_roots.end(), std::greater<>());
  // merge repeated roots
  std::vector<double> distinct;
  for (double x : real_roots) {
    if (!distinct.empty() && std::abs(distinct.back() - x) <= 1e-7 * scale) {
      out.degenerate = true;
      continue;
    }
    distinct.push_back(x);
  }
  out.real_eigenvalue_count = real_roots.size();

  for (double lambda : distinct) {
    Mat3 shifted = a;
    for (int i = 0; i < 3; ++i) shifted[i * 4] -= lambda;
    // a repeated root leaves a pivot of order sqrt(eps) * |A|
    const double tol = (out.degenerate ? 1e-6 : 1e-12) * std::max(anorm, 1e-300);
    std::vector<Vec3> basis = null_space(shifted, tol);
    if (basis.empty()) {
      std::ostringstream os;
      os << "no null vector found for eigenvalue " << lambda;
      out.notes.push_back(os.str());
      continue;
    }
    if (basis.size() > 1) {
      std::ostringstream os;
      os << "eigenvalue " << lambda << " has a " << basis.size()
         << "-dimensional eigenspace: every direction in it is a sweet spot";
      out.notes.push_back(os.str());
    }
    for (const auto& v : basis) out.spots.push_back({canonical_sign(v), lambda});
  }
  if (out.degenerate && out.notes.empty()) out.notes.push_back("repeated eigenvalue; matrix may be defective");
  return out;
}

DirectionMap direction_sweep(const GTensorPair& pair, std::size_t n_theta, std::size_t n_phi, double magnitude) {
  if (n_theta < 2 || n_phi < 2) throw DomainError("direction_sweep: grid must be at least 2 x 2");
  pair.validate();
  DirectionMap m;
  m.n_theta = n_theta;
  m.n_phi = n_phi;
  const std::size_t total = n_theta * n_phi;
  m.theta_deg.resize(total);
  m.phi_deg.resize(total);
  m.delta_x_norm.resize(total);
  m.delta_z_norm.resize(total);
  m.delta_x.resize(total);
  m.delta_z.resize(total);
  m.zeeman.resize(total);
  const long rows = static_cast<long>(n_theta);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) {
    const double theta = 180.0 * static_cast<double>(i) / static_cast<double>(n_theta - 1);
    for (std::size_t j = 0; j < n_phi; ++j) {
      const double phi = 360.0 * static_cast<double>(j) / static_cast<double>(n_phi);
      const std::size_t idx = static_cast<std::size_t>(i) * n_phi + j;
      const DeltaDecomposition d = decompose_delta(pair, FieldConfig::from_angles(theta, phi, magnitude));
      m.theta_deg[idx] = theta;
      m.phi_deg[idx] = phi;
      m.delta_x[idx] = d.delta_x;
      m.delta_z[idx] = d.delta_z;
      m.zeeman[idx] = d.zeeman_energy;
      m.delta_x_norm[idx] = d.delta_norm > 0.0 ? d.delta_x / d.delta_norm : 0.0;
      m.delta_z_norm[idx] = d.delta_norm > 0.0 ? d.delta_z / d.delta_norm : 0.0;
    }
  }
  return m;
}

GTensorPair synthetic_single_real_pair() {
  GTensorPair p;
  p.g = {1.62, 0.21, -0.08, 0.17, 2.05, 0.12, -0.05, 0.09, 1.31};
  // A = R diag-block(0.02 +/- 0.05 i, 0.03) R^T with a fixed rotation R, then g' = g A
  const double c1 = std::cos(0.4), s1 = std::sin(0.4);
  const double c2 = std::cos(0.7), s2 = std::sin(0.7);
  const Mat3 rz = {c1, -s1, 0.0, s1, c1, 0.0, 0.0, 0.0, 1.0};
  const Mat3 rx = {1.0, 0.0, 0.0, 0.0, c2, -s2, 0.0, s2, c2};
  const Mat3 r = mat3_multiply(rz, rx);
  const Mat3 rt = {r[0], r[3], r[6], r[1], r[4], r[7], r[2], r[5], r[8]};
  const Mat3 block = {0.02, -0.05, 0.0, 0.05, 0.02, 0.0, 0.0, 0.0, 0.03};
  const Mat3 a = mat3_multiply(mat3_multiply(r, block), rt);
  p.g_prime = mat3_multiply(p.g, a);
  return p;
}

GTensorPair read_gtensor_pair_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open g-tensor file " + path);
  GTensorPair pair;
  std::size_t g_rows = 0;
  std::size_t gp_rows = 0;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::stringstream ss(line.substr(first));
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    auto where = [&] { return path + ":" + std::to_string(number) + ": "; };
    if (cells.size() != 4) throw ConfigError(where() + "expected 4 comma-separated fields");
    Vec3 row{};
    for (std::size_t i = 0; i < 3; ++i) {
      try {
        std::size_t used = 0;
        row[i] = std::stod(cells[i + 1], &used);
      } catch (const std::exception&) {
        throw ConfigError(where() + "invalid number '" + cells[i + 1] + "'");
      }
    }
    const std::string tag = cells[0].substr(0, cells[0].find_last_not_of(" \t") + 1);
    if (tag == "g" && g_rows < 3) {
      std::copy(row.begin(), row.end(), pair.g.begin() + 3 * g_rows++);
    } else if (tag == "g_prime" && gp_rows < 3) {
      std::copy(row.begin(), row.end(), pair.g_prime.begin() + 3 * gp_rows++);
    } else {
      throw ConfigError(where() + "unexpected row tag '" + tag + "'");
    }
  }
  if (g_rows != 3 || gp_rows != 3) throw ConfigError(path + ": need three g rows and three g_prime rows");
  return pair;
}

}  // namespace qmq
