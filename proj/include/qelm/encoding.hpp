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
 * Data-encoding unitaries U(x) on the accessible register.
 *
 * Product schemes apply U_k(x) = diag(e^{i l1 x}, e^{i l2 x}) on qubit k, with
 * (l1, l2) the generator eigenvalues of that qubit, so U(x) = e^{iHx} with H
 * diagonal in the computational basis. Pauli re-uploading uses (-1/2, 1/2) on
 * every qubit; exponential encoding uses (-3^k/2, 3^k/2) on qubit k (k from 0).
 *
 * The layered scheme re-uploads x in every layer: qubit k of layer l applies
 * RY(theta_lk) RZ(x) RY(phi_lk), then a CNOT chain (0,1), (1,2), ... follows.
 * The angles are drawn once from the seed.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qelm/gates.hpp"
#include "qelm/linalg.hpp"
#include "qelm/rng.hpp"

namespace qelm {

enum class EncodingScheme { PauliReupload, Exponential, Layered, Product, Diagonal };

inline std::string to_string(EncodingScheme s) {
  switch (s) {
    case EncodingScheme::PauliReupload: return "pauli";
    case EncodingScheme::Exponential: return "exponential";
    case EncodingScheme::Layered: return "layered";
    case EncodingScheme::Product: return "product";
    case EncodingScheme::Diagonal: return "diagonal";
  }
  return "unknown";
}

class EncodingSpec {
 public:
  using EigPair = std::pair<double, double>;

  static EncodingSpec pauli(std::size_t n_accessible) {
    EncodingSpec s(EncodingScheme::PauliReupload, n_accessible);
    s.eigs_.assign(n_accessible, {-0.5, 0.5});
    return s;
  }

  static EncodingSpec exponential(std::size_t n_accessible) {
    EncodingSpec s(EncodingScheme::Exponential, n_accessible);
    double beta = 1.0;
    for (std::size_t k = 0; k < n_accessible; ++k, beta *= 3.0) s.eigs_.push_back({-beta / 2, beta / 2});
    return s;
  }

  /// Arbitrary per-qubit generator eigenvalues.
  static EncodingSpec product(std::vector<EigPair> eigs) {
    EncodingSpec s(EncodingScheme::Product, eigs.size());
    s.eigs_ = std::move(eigs);
    return s;
  }

  /// Non-product diagonal generator with the given 2^n eigenvalues.
  static EncodingSpec diagonal(std::vector<double> generator_eigs) {
    const std::size_t d = generator_eigs.size();
    std::size_t n = 0;
    while ((std::size_t{1} << n) < d) ++n;
    if (d == 0 || (std::size_t{1} << n) != d) throw std::invalid_argument("EncodingSpec::diagonal: size must be a power of two");
    EncodingSpec s(EncodingScheme::Diagonal, n);
    s.diag_ = std::move(generator_eigs);
    return s;
  }

  static EncodingSpec layered(std::size_t n_accessible, std::size_t layers, std::uint64_t seed, bool entangle = true) {
    if (layers == 0) throw std::invalid_argument("EncodingSpec::layered: need at least one layer");
    EncodingSpec s(EncodingScheme::Layered, n_accessible);
    s.layers_ = layers;
    s.seed_ = seed;
    s.entangle_ = entangle;
    Rng rng(seed);
    s.theta_.resize(layers * n_accessible);
    s.phi_.resize(layers * n_accessible);
    for (std::size_t i = 0; i < layers * n_accessible; ++i) {
      s.theta_[i] = rng.uniform(0.0, 2 * std::numbers::pi);
      s.phi_[i] = rng.uniform(0.0, 2 * std::numbers::pi);
    }
    return s;
  }

  EncodingScheme scheme() const { return scheme_; }
  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return std::size_t{1} << n_; }
  std::size_t layers() const { return layers_; }
  std::uint64_t seed() const { return seed_; }
  bool entangling() const { return entangle_; }

  /// Diagonal in the computational basis (all schemes except Layered).
  bool is_diagonal() const { return scheme_ != EncodingScheme::Layered; }
  bool is_product() const { return is_diagonal() && scheme_ != EncodingScheme::Diagonal; }

  const std::vector<EigPair>& per_qubit_eigs() const {
    if (!is_product()) throw std::invalid_argument("EncodingSpec: scheme has no per-qubit eigenvalues");
    return eigs_;
  }

  /// Eigenvalues of the full generator H, indexed by computational basis state.
  RealVector generator_eigenvalues() const {
    if (!is_diagonal()) throw std::invalid_argument("EncodingSpec: layered encoding has no diagonal generator");
    RealVector mu(dim());
    if (scheme_ == EncodingScheme::Diagonal) {
      for (std::size_t i = 0; i < dim(); ++i) mu(i) = diag_[i];
      return mu;
    }
    for (std::size_t i = 0; i < dim(); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        const bool one = (i >> (n_ - 1 - k)) & 1u;
        acc += one ? eigs_[k].second : eigs_[k].first;
      }
      mu(i) = acc;
    }
    return mu;
  }

  double theta(std::size_t layer, std::size_t qubit) const { return theta_[layer * n_ + qubit]; }
  double phi(std::size_t layer, std::size_t qubit) const { return phi_[layer * n_ + qubit]; }

 private:
  EncodingSpec(EncodingScheme scheme, std::size_t n) : scheme_(scheme), n_(n) {
    if (n == 0 || n > 12) throw std::invalid_argument("EncodingSpec: n_accessible must be in [1, 12]");
  }

  EncodingScheme scheme_;
  std::size_t n_;
  std::vector<EigPair> eigs_;
  std::vector<double> diag_;
  std::size_t layers_ = 0;
  std::uint64_t seed_ = 0;
  bool entangle_ = true;
  std::vector<double> theta_, phi_;
};

/// Diagonal of U(x) = e^{iHx} for diagonal schemes.
inline Vector encode_phases(const EncodingSpec& spec, double x) {
  const RealVector mu = spec.generator_eigenvalues();
  Vector out(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) out(i) = std::exp(kI * (mu(i) * x));
  return out;
}

/// Single-qubit block of layer `layer` on `qubit`.
inline Gate2 layered_block(const EncodingSpec& spec, std::size_t layer, std::size_t qubit, double x) {
  return gates::ry(spec.theta(layer, qubit)) * gates::rz(x) * gates::ry(spec.phi(layer, qubit));
}

/// Apply one layer of the layered ansatz to a state vector.
inline void apply_layer(const EncodingSpec& spec, std::size_t layer, double x, Vector& psi) {
  const std::size_t n = spec.num_qubits();
  for (std::size_t k = 0; k < n; ++k) apply_gate(psi, n, k, layered_block(spec, layer, k, x));
  if (spec.entangling())
    for (std::size_t k = 0; k + 1 < n; ++k) apply_cnot(psi, n, k, k + 1);
}

/// Apply one layer of the layered ansatz to a density matrix.
inline void apply_layer(const EncodingSpec& spec, std::size_t layer, double x, Matrix& rho) {
  const std::size_t n = spec.num_qubits();
  for (std::size_t k = 0; k < n; ++k) apply_gate(rho, n, k, layered_block(spec, layer, k, x));
  if (spec.entangling())
    for (std::size_t k = 0; k + 1 < n; ++k) apply_cnot(rho, n, k, k + 1);
}

inline Matrix layered_encode(const EncodingSpec& spec, double x) {
  if (spec.scheme() != EncodingScheme::Layered) throw std::invalid_argument("layered_encode: spec is not layered");
  const std::size_t n = spec.num_qubits();
  Matrix u = Matrix::Identity(spec.dim(), spec.dim());
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    for (std::size_t k = 0; k < n; ++k) apply_gate_rows(u, n, k, layered_block(spec, l, k, x));
    if (spec.entangling())
      for (std::size_t k = 0; k + 1 < n; ++k) apply_cnot_rows(u, n, k, k + 1);
  }
  return u;
}

inline Matrix encode(const EncodingSpec& spec, double x) {
  if (spec.is_diagonal()) return encode_phases(spec, x).asDiagonal();
  return layered_encode(spec, x);
}

/// psi -> U(x) psi
inline void apply_encoding(const EncodingSpec& spec, double x, Vector& psi) {
  if (spec.is_diagonal()) {
    psi = psi.cwiseProduct(encode_phases(spec, x));
    return;
  }
  for (std::size_t l = 0; l < spec.layers(); ++l) apply_layer(spec, l, x, psi);
}

/// rho -> U(x) rho U(x)^dagger
inline Matrix encoded_state(const EncodingSpec& spec, double x, const Matrix& rho0) {
  if (spec.is_diagonal()) {
    const Vector ph = encode_phases(spec, x);
    return ph.asDiagonal() * rho0 * ph.conjugate().asDiagonal();
  }
  Matrix rho = rho0;
  for (std::size_t l = 0; l < spec.layers(); ++l) apply_layer(spec, l, x, rho);
  return rho;
}

}  // namespace qelm
