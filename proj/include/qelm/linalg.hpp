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
 * Dense complex linear algebra used by every other module: Kronecker
 * products, Hermitian eigendecomposition and exponentials, Haar sampling,
 * partial traces, Schatten norms, numerical rank and quantum entropies.
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qelm/rng.hpp"

namespace qelm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr cplx kI{0.0, 1.0};

/// Default relative tolerance for numerical rank decisions.
inline constexpr double kRankTolerance = 1e-9;

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// M == M^dagger elementwise, with the tolerance scaled by max(1, |M|_max).
inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol * std::max(1.0, max_abs(m));
}

inline bool is_unitary(const Matrix& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) return false;
  return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) <= tol;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Matrix kron_all(std::span<const Matrix> factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

struct EigenDecomposition {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

inline EigenDecomposition herm_eig(const Matrix& h) {
  if (!is_hermitian(h, 1e-10)) throw std::invalid_argument("herm_eig: matrix is not Hermitian");
  // Symmetrize so round-off in the input does not leak into the solver.
  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("herm_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RealVector herm_eigenvalues(const Matrix& h) {
  if (!is_hermitian(h, 1e-10)) throw std::invalid_argument("herm_eigenvalues: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// exp(i t h) for Hermitian h, computed through the eigendecomposition so the
/// result is unitary to working precision for any t.
inline Matrix herm_expm(const Matrix& h, double t) {
  const auto eig = herm_eig(h);
  Vector phases(eig.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(kI * (eig.values(k) * t));
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

/// Complex Ginibre matrix with i.i.d. entries (N(0,1) + i N(0,1)) / sqrt(2).
inline Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix z(rows, cols);
  const double s = std::numbers::sqrt2 / 2.0;
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) z(i, j) = cplx(rng.normal() * s, rng.normal() * s);
  return z;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal moved into Q (Mezzadri's correction).
inline Matrix haar_unitary(std::size_t d, Rng& rng) {
  if (d == 0) throw std::invalid_argument("haar_unitary: dimension must be >= 1");
  const Matrix z = ginibre(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (std::size_t k = 0; k < d; ++k) {
    const cplx rkk = r(k, k);
    const double mag = std::abs(rkk);
    q.col(k) *= (mag > 0.0) ? rkk / mag : cplx(1.0);
  }
  return q;
}

/// Haar-random pure state. Distributed exactly like U|psi> for Haar U and any
/// fixed unit vector psi.
inline Vector haar_state(std::size_t d, Rng& rng) {
  if (d == 0) throw std::invalid_argument("haar_state: dimension must be >= 1");
  Vector v = ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

/// Trace out every subsystem not listed in `keep`. Subsystem 0 is the most
/// significant factor of the tensor product (the leftmost Kronecker factor).
inline Matrix partial_trace(const Matrix& rho, std::span<const std::size_t> keep, std::span<const std::size_t> dims) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("partial_trace: matrix is not square");
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (total != static_cast<std::size_t>(rho.rows()))
    throw std::invalid_argument("partial_trace: subsystem dimensions do not match the matrix");
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) {
    if (k >= dims.size()) throw std::invalid_argument("partial_trace: subsystem index out of range");
    kept[k] = true;
  }
  std::size_t dk = 1, dt = 1;
  for (std::size_t s = 0; s < dims.size(); ++s) (kept[s] ? dk : dt) *= dims[s];

  // full_index[a * dt + t]: full basis index for kept multi-index a and traced multi-index t.
  std::vector<std::size_t> full_index(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx, a = 0, t = 0, a_stride = 1, t_stride = 1;
    for (std::size_t s = dims.size(); s-- > 0;) {
      const std::size_t digit = rem % dims[s];
      rem /= dims[s];
      if (kept[s]) {
        a += digit * a_stride;
        a_stride *= dims[s];
      } else {
        t += digit * t_stride;
        t_stride *= dims[s];
      }
    }
    full_index[a * dt + t] = idx;
  }
  Matrix out = Matrix::Zero(dk, dk);
  for (std::size_t a = 0; a < dk; ++a)
    for (std::size_t b = 0; b < dk; ++b) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < dt; ++t) acc += rho(full_index[a * dt + t], full_index[b * dt + t]);
      out(a, b) = acc;
    }
  return out;
}

inline RealVector singular_values(const Matrix& m) {
  if (m.size() == 0) return RealVector();
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

/// Number of singular values above tol * sigma_max. The zero matrix has rank 0.
inline std::size_t svd_rank(const Matrix& m, double tol = kRankTolerance) {
  if (!(tol > 0.0)) throw std::invalid_argument("svd_rank: tolerance must be positive");
  const RealVector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = tol * s(0);
  return static_cast<std::size_t>((s.array() > cut).count());
}

/// Schatten-1 norm.
inline double trace_norm(const Matrix& m) {
  if (m.rows() == m.cols() && is_hermitian(m, 1e-12)) return herm_eigenvalues(m).cwiseAbs().sum();
  return singular_values(m).sum();
}

/// Schatten-2 (Frobenius) norm.
inline double hs_norm(const Matrix& m) { return m.norm(); }

/// Largest singular value.
inline double operator_norm(const Matrix& m) {
  if (m.rows() == m.cols() && is_hermitian(m, 1e-12)) return herm_eigenvalues(m).cwiseAbs().maxCoeff();
  const RealVector s = singular_values(m);
  return s.size() ? s(0) : 0.0;
}

inline double real_trace(const Matrix& m) { return m.trace().real(); }

namespace detail {
inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }
}  // namespace detail

/// Von Neumann entropy in bits.
inline double von_neumann_entropy(const Matrix& rho) {
  const RealVector p = herm_eigenvalues(rho);
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) s -= detail::xlog2x(std::max(p(k), 0.0));
  return s;
}

/// S(rho || sigma) = Tr[rho (log2 rho - log2 sigma)], in bits. Returns +inf
/// when rho has weight outside the support of sigma.
inline double relative_entropy(const Matrix& rho, const Matrix& sigma, double support_tol = 1e-12) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw std::invalid_argument("relative_entropy: dimension mismatch");
  const auto es = herm_eig(sigma);
  // Tr[rho log sigma] = sum_k <v_k|rho|v_k> log lambda_k
  double cross = 0.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    const double w = (es.vectors.col(k).adjoint() * rho * es.vectors.col(k))(0, 0).real();
    if (es.values(k) <= support_tol) {
      if (w > support_tol) return std::numeric_limits<double>::infinity();
      continue;
    }
    cross += w * std::log2(es.values(k));
  }
  const double value = -von_neumann_entropy(rho) - cross;
  return std::max(value, 0.0);
}

/// Sandwiched 2-Renyi divergence to the maximally mixed state:
/// S_2(rho || I/d) = log2(d Tr[rho^2]).
inline double renyi2_relative_entropy(const Matrix& rho, std::size_t d) {
  if (static_cast<std::size_t>(rho.rows()) != d || static_cast<std::size_t>(rho.cols()) != d)
    throw std::invalid_argument("renyi2_relative_entropy: rho must be d x d");
  const double purity = (rho * rho).trace().real();
  return std::max(std::log2(static_cast<double>(d) * purity), 0.0);
}

/// Binary entropy H2(p) in bits.
inline double binary_entropy(double p) { return -detail::xlog2x(p) - detail::xlog2x(1.0 - p); }

}  // namespace qelm
