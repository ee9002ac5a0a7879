// Copyright 2026 The QELM Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Density matrices, expectation values, finite-shot estimation and Pauli
 * noise channels.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qelm/gates.hpp"
#include "qelm/linalg.hpp"
#include "qelm/pauli.hpp"
#include "qelm/rng.hpp"

namespace qelm {

inline std::size_t qubits_for_dim(std::size_t d) {
  if (d == 0 || (d & (d - 1)) != 0) throw std::invalid_argument("dimension is not a power of two");
  std::size_t n = 0;
  while ((std::size_t{1} << n) < d) ++n;
  return n;
}

/// Validated quantum state on n qubits: Hermitian, unit trace, PSD.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m, double tol = 1e-10) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("DensityMatrix: matrix is not square");
    n_ = qubits_for_dim(static_cast<std::size_t>(m_.rows()));
    if (!is_hermitian(m_, tol)) throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > tol) throw std::invalid_argument("DensityMatrix: trace is not 1");
    if (herm_eigenvalues(m_).minCoeff() < -tol) throw std::invalid_argument("DensityMatrix: matrix is not PSD");
  }

  static DensityMatrix pure(const Vector& psi) {
    const double nrm = psi.norm();
    if (nrm == 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
    const Vector v = psi / nrm;
    return DensityMatrix(v * v.adjoint());
  }

  static DensityMatrix basis(std::size_t n_qubits, std::uint64_t index) {
    Vector v = Vector::Zero(std::size_t{1} << n_qubits);
    v(index) = 1.0;
    return pure(v);
  }

  static DensityMatrix maximally_mixed(std::size_t n_qubits) {
    const std::size_t d = std::size_t{1} << n_qubits;
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
  }

  /// |+><+|^{(x) n}: every entry equals 2^{-n}.
  static DensityMatrix plus_state(std::size_t n_qubits) {
    const std::size_t d = std::size_t{1} << n_qubits;
    return DensityMatrix(Matrix::Constant(d, d, 1.0 / static_cast<double>(d)));
  }

  const Matrix& matrix() const { return m_; }
  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double purity() const { return (m_ * m_).trace().real(); }

 private:
  Matrix m_;
  std::size_t n_ = 0;
};

/// Tr[O rho]; the imaginary part (round-off for Hermitian O) is discarded.
inline double expectation(const DensityMatrix& state, const Matrix& obs) {
  if (obs.rows() != obs.cols() || static_cast<std::size_t>(obs.rows()) != state.dim())
    throw std::invalid_argument("expectation: observable dimension does not match the state");
  if (!is_hermitian(obs, 1e-10)) throw std::invalid_argument("expectation: observable is not Hermitian");
  return (obs.cwiseProduct(state.matrix().transpose())).sum().real();
}

inline double expectation(const DensityMatrix& state, const PauliString& p) {
  if (p.dim() != state.dim()) throw std::invalid_argument("expectation: Pauli string does not match the state");
  return p.expectation(state.matrix());
}

/// Empirical mean of n_shots +-1 outcomes whose mean is `expval`.
inline double sample_shots(double expval, std::uint64_t n_shots, Rng& rng) {
  if (n_shots == 0) throw std::invalid_argument("sample_shots: n_shots must be positive");
  const double p_plus = std::clamp((1.0 + expval) / 2.0, 0.0, 1.0);
  const std::uint64_t plus = std::binomial_distribution<std::uint64_t>(n_shots, p_plus)(rng.engine());
  return (2.0 * static_cast<double>(plus) - static_cast<double>(n_shots)) / static_cast<double>(n_shots);
}

/// Single-qubit Pauli channel X -> q_x X, Y -> q_y Y, Z -> q_z Z, I -> I.
class NoiseSpec {
 public:
  NoiseSpec(double q_x, double q_y, double q_z) : qx_(q_x), qy_(q_y), qz_(q_z) {
    for (double q : {qx_, qy_, qz_})
      if (!(q >= -1.0 && q <= 1.0)) throw std::invalid_argument("NoiseSpec: damping factors must lie in [-1, 1]");
    const auto p = probabilities();
    for (double v : p)
      if (v < -1e-12) throw std::invalid_argument("NoiseSpec: damping factors do not define a completely positive map");
  }

  /// q_x = q_y = q_z = 1 - p.
  static NoiseSpec depolarizing(double p) { return NoiseSpec(1.0 - p, 1.0 - p, 1.0 - p); }
  static NoiseSpec identity() { return NoiseSpec(1.0, 1.0, 1.0); }

  double q_x() const { return qx_; }
  double q_y() const { return qy_; }
  double q_z() const { return qz_; }
  double q() const { return std::max({std::abs(qx_), std::abs(qy_), std::abs(qz_)}); }

  /// Kraus weights (p_I, p_X, p_Y, p_Z) of the equivalent Pauli mixture.
  std::array<double, 4> probabilities() const {
    return {(1 + qx_ + qy_ + qz_) / 4, (1 + qx_ - qy_ - qz_) / 4, (1 - qx_ + qy_ - qz_) / 4, (1 - qx_ - qy_ + qz_) / 4};
  }

 private:
  double qx_, qy_, qz_;
};

/// In-place Pauli channel on one qubit of an n-qubit density matrix.
inline void apply_pauli_noise(Matrix& rho, std::size_t n_qubits, std::size_t qubit, const NoiseSpec& noise) {
  const std::size_t mask = detail::bit_of(n_qubits, qubit);
  const std::size_t d = static_cast<std::size_t>(rho.rows());
  const double diag_keep = (1 + noise.q_z()) / 2, diag_swap = (1 - noise.q_z()) / 2;
  const double off_keep = (noise.q_x() + noise.q_y()) / 2, off_swap = (noise.q_x() - noise.q_y()) / 2;
  // Each (a, b) couples only with (a ^ mask, b ^ mask); visit each pair once.
  for (std::size_t a = 0; a < d; ++a) {
    if (a & mask) continue;
    const std::size_t a1 = a | mask;
    for (std::size_t b = 0; b < d; ++b) {
      const std::size_t b1 = b ^ mask;
      const bool same = ((b & mask) == 0);  // bit of a is 0
      const double keep = same ? diag_keep : off_keep, swp = same ? diag_swap : off_swap;
      const cplx v = rho(a, b), w = rho(a1, b1);
      rho(a, b) = keep * v + swp * w;
      rho(a1, b1) = keep * w + swp * v;
    }
  }
}

inline DensityMatrix pauli_noise(const DensityMatrix& state, const NoiseSpec& noise, std::size_t qubit) {
  if (qubit >= state.num_qubits()) throw std::invalid_argument("pauli_noise: qubit index out of range");
  Matrix m = state.matrix();
  apply_pauli_noise(m, state.num_qubits(), qubit, noise);
  return DensityMatrix(std::move(m));
}

/// |m><m| for a computational basis bitstring (qubit 0 leftmost).
inline Matrix global_projector(const std::vector<int>& bits) {
  const std::size_t n = bits.size();
  std::uint64_t index = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw std::invalid_argument("global_projector: bits must be 0 or 1");
    index = (index << 1) | static_cast<std::uint64_t>(b);
  }
  const std::size_t d = std::size_t{1} << n;
  Matrix m = Matrix::Zero(d, d);
  m(index, index) = 1.0;
  return m;
}

inline Matrix global_projector(const std::string& bits) {
  std::vector<int> v;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("global_projector: bits must be 0 or 1");
    v.push_back(c - '0');
  }
  return global_projector(v);
}

}  // namespace qelm
