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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qelm/encoding.hpp"
#include "qelm/pauli.hpp"

using namespace qelm;

TEST(Encoding, EigenvalueTables) {
  const auto p = EncodingSpec::pauli(3);
  for (const auto& [a, b] : p.per_qubit_eigs()) {
    EXPECT_EQ(a, -0.5);
    EXPECT_EQ(b, 0.5);
  }
  const auto e = EncodingSpec::exponential(4);
  double beta = 1;
  for (const auto& [a, b] : e.per_qubit_eigs()) {
    EXPECT_EQ(a, -beta / 2);
    EXPECT_EQ(b, beta / 2);
    beta *= 3;
  }
  EXPECT_THROW(EncodingSpec::pauli(0), std::invalid_argument);
  EXPECT_THROW(EncodingSpec::pauli(13), std::invalid_argument);
  EXPECT_THROW(EncodingSpec::diagonal({1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(EncodingSpec::layered(2, 0, 1), std::invalid_argument);
}

TEST(Encoding, SingleQubitPauli) {
  const double x = 0.83;
  const Matrix u = encode(EncodingSpec::pauli(1), x);
  EXPECT_NEAR(std::abs(u(0, 0) - std::exp(-kI * x / 2.0)), 0, 1e-15);
  EXPECT_NEAR(std::abs(u(1, 1) - std::exp(kI * x / 2.0)), 0, 1e-15);
  EXPECT_EQ(u(0, 1), cplx(0));
}

TEST(Encoding, ZeroInputIsIdentity) {
  for (const auto& s : {EncodingSpec::pauli(3), EncodingSpec::exponential(3)})
    EXPECT_LT(max_abs(encode(s, 0.0) - Matrix::Identity(8, 8)), 1e-15);
}

TEST(Encoding, ExponentialTwoQubitPhases) {
  const double x = -1.3;
  const Vector ph = encode_phases(EncodingSpec::exponential(2), x);
  // basis |q0 q1>, qubit 0 carries +-1/2 and qubit 1 carries +-3/2
  const double mu[4] = {-0.5 - 1.5, -0.5 + 1.5, 0.5 - 1.5, 0.5 + 1.5};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(ph(i) - std::exp(kI * (mu[i] * x))), 0, 1e-15);
}

TEST(Encoding, DiagonalEqualsGeneratorExponential) {
  // Oracle: e^{iHx} built from the Kronecker sum of per-qubit generators.
  const auto spec = EncodingSpec::product({{-0.3, 0.9}, {0.1, 2.2}, {-1.0, 1.0}});
  Matrix h = Matrix::Zero(8, 8);
  for (std::size_t k = 0; k < 3; ++k) {
    Matrix hk = Matrix::Zero(2, 2);
    hk(0, 0) = spec.per_qubit_eigs()[k].first;
    hk(1, 1) = spec.per_qubit_eigs()[k].second;
    Matrix term = Matrix::Identity(1, 1);
    for (std::size_t q = 0; q < 3; ++q) term = kron(term, q == k ? hk : Matrix::Identity(2, 2));
    h += term;
  }
  const double x = 2.7;
  EXPECT_LT(max_abs(encode(spec, x) - herm_expm(h, x)), 1e-13);
}

TEST(Encoding, LayeredSingleQubit) {
  const auto spec = EncodingSpec::layered(1, 1, 11, false);
  const Matrix u = layered_encode(spec, 0.4);
  EXPECT_TRUE(is_unitary(u));
  const Matrix expect = gates::ry(spec.theta(0, 0)) * gates::rz(0.4) * gates::ry(spec.phi(0, 0));
  EXPECT_LT(max_abs(u - expect), 1e-15);
}

TEST(Encoding, LayeredReproducible) {
  const auto a = EncodingSpec::layered(3, 4, 123), b = EncodingSpec::layered(3, 4, 123);
  EXPECT_EQ(layered_encode(a, 0.77), layered_encode(b, 0.77));
  const auto c = EncodingSpec::layered(3, 4, 124);
  EXPECT_GT(max_abs(layered_encode(a, 0.77) - layered_encode(c, 0.77)), 1e-3);
}

TEST(Encoding, StatePathsAgree) {
  Rng rng(5);
  const auto spec = EncodingSpec::layered(3, 3, 8);
  Vector psi = haar_state(8, rng);
  const Matrix rho0 = psi * psi.adjoint();
  const double x = 1.9;
  const Matrix u = encode(spec, x);
  Vector v = psi;
  apply_encoding(spec, x, v);
  EXPECT_LT(max_abs(v - u * psi), 1e-13);
  EXPECT_LT(max_abs(encoded_state(spec, x, rho0) - u * rho0 * u.adjoint()), 1e-13);
  const auto ex = EncodingSpec::exponential(3);
  EXPECT_LT(max_abs(encoded_state(ex, x, rho0) - encode(ex, x) * rho0 * encode(ex, x).adjoint()), 1e-13);
}

TEST(Encoding, DeepLayersConcentrate) {
  // Var_x <Z1 Z2> for L = 100 is well below L = 1 at n_A = 6.
  auto var_zz = [](std::size_t layers) {
    const auto spec = EncodingSpec::layered(6, layers, 2024);
    const PauliString zz = PauliString::parse("ZZIIII");
    Rng rng(99);
    double s = 0, s2 = 0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
      Vector psi = Vector::Zero(64);
      psi(0) = 1;
      apply_encoding(spec, rng.uniform(-std::numbers::pi, std::numbers::pi), psi);
      const double e = zz.expectation(psi);
      s += e;
      s2 += e * e;
    }
    return (s2 - s * s / n) / (n - 1);
  };
  EXPECT_GT(var_zz(1), 10 * var_zz(100));
}
