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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace qmq {

using cplx = std::complex<double>;

// Dense complex matrix, row-major storage.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool empty() const { return entries_.empty(); }

  cplx& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  cplx* data() { return entries_.data(); }
  const cplx* data() const { return entries_.data(); }
  const std::vector<cplx>& entries() const { return entries_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix conjugate() const;
  ComplexMatrix transpose() const;
  cplx trace() const;
  double frobenius_norm() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(cplx s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> entries_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
std::vector<cplx> operator*(const ComplexMatrix& a, const std::vector<cplx>& v);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// |v><v|
ComplexMatrix outer(const std::vector<cplx>& v);
std::vector<cplx> basis_vector(std::size_t dim, std::size_t index);
ComplexMatrix projector(std::size_t dim, std::size_t index);

// (A (x) B)[i*p + k, j*q + l] = A[i,j] B[k,l], with B of size p x q.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Vectorization used throughout: vec(rho)[i*d + k] = rho(k, i), i.e. columns are
// stacked. For a qubit ordered (e, g) this yields (rho_ee, rho_ge, rho_eg, rho_gg).
std::vector<cplx> vec(const ComplexMatrix& rho);
ComplexMatrix unvec(const std::vector<cplx>& v, std::size_t dim);

// conj(M) (x) M, so that transfer_matrix(M) * vec(rho) == vec(M rho M^dagger).
ComplexMatrix transfer_matrix(const ComplexMatrix& m);

// unvec(upsilon * vec(rho))
ComplexMatrix apply_superoperator(const ComplexMatrix& upsilon, const ComplexMatrix& rho);

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // eigenvectors as columns
};

// Cyclic complex Jacobi rotations. Throws DomainError for non-square or
// non-Hermitian input.
HermitianEigen hermitian_eigen(const ComplexMatrix& h);

// exp(-i H tau / hbar) from the eigendecomposition of H (energies in ueV, tau in ns).
ComplexMatrix hermitian_propagator(const ComplexMatrix& h, double tau);

// Hermitian, unit trace, eigenvalues >= -1e-10. Throws DomainError otherwise.
void check_density_matrix(const ComplexMatrix& rho, double tol = 1e-12);

double purity(const ComplexMatrix& rho);

}  // namespace qmq
