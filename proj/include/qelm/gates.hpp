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

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

#include "qelm/linalg.hpp"

namespace qelm {

using Gate2 = Eigen::Matrix2cd;

namespace gates {

inline Gate2 rz(double angle) {
  Gate2 g = Gate2::Zero();
  g(0, 0) = std::exp(-kI * (angle / 2));
  g(1, 1) = std::exp(kI * (angle / 2));
  return g;
}

inline Gate2 ry(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  Gate2 g;
  g << c, -s, s, c;
  return g;
}

inline Gate2 rx(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  Gate2 g;
  g << c, -kI * s, -kI * s, c;
  return g;
}

inline Gate2 hadamard() {
  Gate2 g;
  const double r = 1.0 / std::sqrt(2.0);
  g << r, r, r, -r;
  return g;
}

}  // namespace gates

namespace detail {
inline std::size_t bit_of(std::size_t n_qubits, std::size_t qubit) { return std::size_t{1} << (n_qubits - 1 - qubit); }
}  // namespace detail

/// Apply a 2x2 gate to `qubit` of an n-qubit state vector in place.
inline void apply_gate(Vector& psi, std::size_t n_qubits, std::size_t qubit, const Gate2& g) {
  const std::size_t mask = detail::bit_of(n_qubits, qubit);
  const std::size_t d = static_cast<std::size_t>(psi.size());
  for (std::size_t i = 0; i < d; ++i) {
    if (i & mask) continue;
    const cplx a = psi(i), b = psi(i | mask);
    psi(i) = g(0, 0) * a + g(0, 1) * b;
    psi(i | mask) = g(1, 0) * a + g(1, 1) * b;
  }
}

/// Left-multiply the rows of m by the gate acting on `qubit` (m has 2^n rows).
inline void apply_gate_rows(Matrix& m, std::size_t n_qubits, std::size_t qubit, const Gate2& g) {
  const std::size_t mask = detail::bit_of(n_qubits, qubit);
  const std::size_t d = static_cast<std::size_t>(m.rows());
  for (std::size_t i = 0; i < d; ++i) {
    if (i & mask) continue;
    const Eigen::RowVectorXcd a = m.row(i), b = m.row(i | mask);
    m.row(i) = g(0, 0) * a + g(0, 1) * b;
    m.row(i | mask) = g(1, 0) * a + g(1, 1) * b;
  }
}

/// rho -> G rho G^dagger on one qubit.
inline void apply_gate(Matrix& rho, std::size_t n_qubits, std::size_t qubit, const Gate2& g) {
  apply_gate_rows(rho, n_qubits, qubit, g);
  const std::size_t mask = detail::bit_of(n_qubits, qubit);
  const std::size_t d = static_cast<std::size_t>(rho.cols());
  const Gate2 gc = g.conjugate();
  for (std::size_t j = 0; j < d; ++j) {
    if (j & mask) continue;
    const Eigen::VectorXcd a = rho.col(j), b = rho.col(j | mask);
    rho.col(j) = gc(0, 0) * a + gc(0, 1) * b;
    rho.col(j | mask) = gc(1, 0) * a + gc(1, 1) * b;
  }
}

inline void apply_cnot(Vector& psi, std::size_t n_qubits, std::size_t control, std::size_t target) {
  const std::size_t cm = detail::bit_of(n_qubits, control), tm = detail::bit_of(n_qubits, target);
  for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i)
    if ((i & cm) && !(i & tm)) std::swap(psi(i), psi(i | tm));
}

inline void apply_cnot_rows(Matrix& m, std::size_t n_qubits, std::size_t control, std::size_t target) {
  const std::size_t cm = detail::bit_of(n_qubits, control), tm = detail::bit_of(n_qubits, target);
  for (std::size_t i = 0; i < static_cast<std::size_t>(m.rows()); ++i)
    if ((i & cm) && !(i & tm)) m.row(i).swap(m.row(i | tm));
}

inline void apply_cnot(Matrix& rho, std::size_t n_qubits, std::size_t control, std::size_t target) {
  apply_cnot_rows(rho, n_qubits, control, target);
  const std::size_t cm = detail::bit_of(n_qubits, control), tm = detail::bit_of(n_qubits, target);
  for (std::size_t j = 0; j < static_cast<std::size_t>(rho.cols()); ++j)
    if ((j & cm) && !(j & tm)) rho.col(j).swap(rho.col(j | tm));
}

/// Full-register matrix of a single-qubit gate.
inline Matrix embed_gate(std::size_t n_qubits, std::size_t qubit, const Gate2& g) {
  Matrix m = Matrix::Identity(std::size_t{1} << n_qubits, std::size_t{1} << n_qubits);
  apply_gate_rows(m, n_qubits, qubit, g);
  return m;
}

}  // namespace qelm
