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

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qelm/gates.hpp"
#include "qelm/linalg.hpp"
#include "qelm/pauli.hpp"
#include "qelm/rng.hpp"

namespace qelm {

enum class ReservoirKind { Identity, Ising, Haar, LayeredRandom };

inline std::string to_string(ReservoirKind k) {
  switch (k) {
    case ReservoirKind::Identity: return "identity";
    case ReservoirKind::Ising: return "ising";
    case ReservoirKind::Haar: return "haar";
    case ReservoirKind::LayeredRandom: return "layered";
  }
  return "unknown";
}

/// Fixed reservoir unitary acting on all n = n_A + n_H qubits.
struct ReservoirSpec {
  ReservoirKind kind = ReservoirKind::Identity;
  double J = -1.0;
  double Bx = 0.0;
  double Bz = 1.0;
  double t = 10.0;
  std::size_t depth = 10;
  std::uint64_t seed = 0;

  static ReservoirSpec identity() { return {}; }

  static ReservoirSpec ising(double J, double Bx, double Bz, double t = 10.0) {
    ReservoirSpec s;
    s.kind = ReservoirKind::Ising;
    s.J = J;
    s.Bx = Bx;
    s.Bz = Bz;
    s.t = t;
    return s;
  }

  /// J = -1, Bx = 0, Bz = 1.
  static ReservoirSpec ising_integrable(double t = 10.0) { return ising(-1.0, 0.0, 1.0, t); }
  /// J = -1, Bx = 0.7, Bz = 1.5.
  static ReservoirSpec ising_chaotic(double t = 10.0) { return ising(-1.0, 0.7, 1.5, t); }

  static ReservoirSpec haar(std::uint64_t seed) {
    ReservoirSpec s;
    s.kind = ReservoirKind::Haar;
    s.seed = seed;
    return s;
  }

  static ReservoirSpec layered_random(std::size_t depth, std::uint64_t seed) {
    ReservoirSpec s;
    s.kind = ReservoirKind::LayeredRandom;
    s.depth = depth;
    s.seed = seed;
    return s;
  }
};

/// H = J sum_{i<n-1} Z_i Z_{i+1} + Bz sum_i Z_i + Bx sum_i X_i, open boundary.
inline Matrix ising_hamiltonian(std::size_t n, double J, double Bx, double Bz) {
  if (n == 0) throw std::invalid_argument("ising_hamiltonian: n must be >= 1");
  const std::size_t d = std::size_t{1} << n;
  Matrix h = Matrix::Zero(d, d);
  for (std::size_t b = 0; b < d; ++b) {
    auto z = [&](std::size_t q) { return ((b >> (n - 1 - q)) & 1u) ? -1.0 : 1.0; };
    double diag = 0.0;
    for (std::size_t q = 0; q + 1 < n; ++q) diag += J * z(q) * z(q + 1);
    for (std::size_t q = 0; q < n; ++q) diag += Bz * z(q);
    h(b, b) = diag;
    if (Bx != 0.0)
      for (std::size_t q = 0; q < n; ++q) h(b ^ (std::size_t{1} << (n - 1 - q)), b) += Bx;
  }
  return h;
}

/// Layers of random single-qubit rotations RZ RY RZ followed by a CNOT chain.
inline Matrix layered_random_unitary(std::size_t n, std::size_t depth, Rng& rng) {
  const std::size_t d = std::size_t{1} << n;
  Matrix u = Matrix::Identity(d, d);
  for (std::size_t l = 0; l < depth; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      const double a = rng.uniform(0.0, 2 * std::numbers::pi);
      const double b = rng.uniform(0.0, 2 * std::numbers::pi);
      const double c = rng.uniform(0.0, 2 * std::numbers::pi);
      apply_gate_rows(u, n, k, gates::rz(a) * gates::ry(b) * gates::rz(c));
    }
    for (std::size_t k = 0; k + 1 < n; ++k) apply_cnot_rows(u, n, k, k + 1);
  }
  return u;
}

/// Realize the reservoir on n qubits with randomness taken from `rng`.
inline Matrix realize(const ReservoirSpec& spec, std::size_t n, Rng& rng) {
  if (n == 0 || n > 12) throw std::invalid_argument("realize: qubit count must be in [1, 12]");
  const std::size_t d = std::size_t{1} << n;
  switch (spec.kind) {
    case ReservoirKind::Identity: return Matrix::Identity(d, d);
    case ReservoirKind::Ising: return herm_expm(ising_hamiltonian(n, spec.J, spec.Bx, spec.Bz), -spec.t);
    case ReservoirKind::Haar: return haar_unitary(d, rng);
    case ReservoirKind::LayeredRandom: return layered_random_unitary(n, spec.depth, rng);
  }
  throw std::invalid_argument("realize: unknown reservoir kind");
}

/// Realize with the spec's own seed.
inline Matrix realize(const ReservoirSpec& spec, std::size_t n) {
  Rng rng(spec.seed);
  return realize(spec, n, rng);
}

}  // namespace qelm
