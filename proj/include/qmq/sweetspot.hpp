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

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace qmq {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

Mat3 mat3_multiply(const Mat3& a, const Mat3& b);
Vec3 mat3_apply(const Mat3& a, const Vec3& v);
double mat3_determinant(const Mat3& a);
// Throws DomainError if |det| <= 1e-9.
Mat3 mat3_inverse(const Mat3& a);
double norm3(const Vec3& v);

// Right-dot g-tensor and its modulation per unit sensor excitation.
struct GTensorPair {
  Mat3 g{};
  Mat3 g_prime{};

  // Throws DomainError if g is singular.
  void validate() const;
};

struct FieldConfig {
  Vec3 direction{0.0, 0.0, 1.0};
  double magnitude = 1.0;  // T

  static FieldConfig from_angles(double theta_deg, double phi_deg, double magnitude);
};

// Delta = mu_B g' B / 2 in ueV.
Vec3 coupling_vector(const GTensorPair& pair, const FieldConfig& field);

struct DeltaDecomposition {
  double delta_z = 0.0;        // Delta . z'
  double delta_x = 0.0;        // |Delta - delta_z z'| >= 0
  double zeeman_energy = 0.0;  // mu_B |g B|
  double delta_norm = 0.0;
  Vec3 axis{};                 // z' = gB / |gB|
};

// Throws DomainError if |g B| = 0.
DeltaDecomposition decompose_delta(const GTensorPair& pair, const FieldConfig& field);

struct SweetSpot {
  Vec3 direction{};
  double eigenvalue = 0.0;
};

struct SweetSpotResult {
  std::vector<SweetSpot> spots;  // descending eigenvalue; spots.front() is the recommended direction
  std::size_t real_eigenvalue_count = 0;
  double discriminant = 0.0;     // of the characteristic cubic
  bool degenerate = false;       // repeated eigenvalue within tolerance
  std::vector<std::string> notes;
};

// Real right eigenpairs of g^-1 g'. Eigenvalues from the characteristic cubic in
// complex Cardano form; a root counts as real when |Im| < 1e-9 max|lambda|.
// Eigenvectors from the null space of (A - lambda I) by full-pivot elimination.
SweetSpotResult sweet_spot_directions(const GTensorPair& pair);

struct DirectionMap {
  std::size_t n_theta = 0;
  std::size_t n_phi = 0;
  // row-major over (theta, phi); theta in [0, 180] inclusive, phi in [0, 360) exclusive
  std::vector<double> theta_deg;
  std::vector<double> phi_deg;
  std::vector<double> delta_x_norm;
  std::vector<double> delta_z_norm;
  std::vector<double> delta_x;
  std::vector<double> delta_z;
  std::vector<double> zeeman;
};

// Throws DomainError unless n_theta, n_phi >= 2.
DirectionMap direction_sweep(const GTensorPair& pair, std::size_t n_theta, std::size_t n_phi, double magnitude);

// Reads six rows "g,a,b,c" and "g_prime,a,b,c" (three of each, in row order);
// blank lines and lines starting with # are skipped. Throws ConfigError.
GTensorPair read_gtensor_pair_csv(const std::string& path);

// Synthetic pair with exactly one real eigenvalue of g^-1 g' (a stand-in for measured
// tensors, which are not reproduced here).
GTensorPair synthetic_single_real_pair();

}  // namespace qmq
