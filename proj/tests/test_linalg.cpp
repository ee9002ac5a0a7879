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
#include <vector>

#include "qelm/linalg.hpp"
#include "qelm/pauli.hpp"
#include "qelm/reservoir.hpp"
#include "qelm/rng.hpp"

using namespace qelm;

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix projector0() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1;
  return m;
}

}  // namespace

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  Rng d(42), e(43);
  EXPECT_NE(d.uniform(), e.uniform());
}

TEST(Rng, DerivedStreamsIndependentOfOrder) {
  Rng master(7);
  Rng s3 = master.derive(3);
  Rng again = Rng(7).derive(3);
  EXPECT_EQ(s3.uniform(), again.uniform());
  EXPECT_NE(Rng(7).derive(1).uniform(), Rng(7).derive(3).uniform());
}

TEST(Kron, Examples) {
  EXPECT_TRUE(kron(Matrix::Identity(2, 2), Matrix::Identity(2, 2)).isApprox(Matrix::Identity(4, 4)));
  Matrix zz = kron(pauli_z(), pauli_z());
  Matrix expect = Matrix::Zero(4, 4);
  expect.diagonal() << 1, -1, -1, 1;
  EXPECT_EQ(max_abs(zz - expect), 0.0);
  Matrix xp = kron(pauli_x(), projector0());
  Matrix e2 = Matrix::Zero(4, 4);
  e2(2, 0) = 1;
  e2(0, 2) = 1;
  EXPECT_EQ(max_abs(xp - e2), 0.0);
}

TEST(Kron, EntryCount) {
  Rng rng(1);
  Matrix a = ginibre(2, 3, rng), b = ginibre(4, 5, rng);
  Matrix k = kron(a, b);
  EXPECT_EQ(k.rows(), 8);
  EXPECT_EQ(k.cols(), 15);
  EXPECT_EQ(k(5, 7), a(1, 1) * b(1, 2));
}

TEST(HermEig, Paulis) {
  auto ez = herm_eig(pauli_z());
  EXPECT_NEAR(ez.values(0), -1, 1e-14);
  EXPECT_NEAR(ez.values(1), 1, 1e-14);
  auto ex = herm_eig(pauli_x());
  EXPECT_NEAR(ex.values(0), -1, 1e-14);
  // eigenvector of -1 is |->, up to phase
  const Vector v = ex.vectors.col(0);
  EXPECT_NEAR(std::abs(v(0)), 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::abs(v(0) + v(1)), 0.0, 1e-12);
}

TEST(HermEig, IsingSpectrum) {
  auto e = herm_eig(ising_hamiltonian(2, -1, 0, 1));
  EXPECT_NEAR(e.values(0), -3, 1e-12);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(e.values(k), 1, 1e-12);
}

TEST(HermEig, RejectsNonHermitian) {
  Matrix m(2, 2);
  m << 0, 1, 0, 0;
  EXPECT_THROW(herm_eig(m), std::invalid_argument);
  EXPECT_THROW(herm_expm(m, 1.0), std::invalid_argument);
}

TEST(HermExpm, Examples) {
  Rng rng(3);
  Matrix g = ginibre(4, 4, rng);
  Matrix h = g + g.adjoint();
  EXPECT_LT(max_abs(herm_expm(h, 0.0) - Matrix::Identity(4, 4)), 1e-12);
  EXPECT_LT(max_abs(herm_expm(pauli_z(), std::numbers::pi) + Matrix::Identity(2, 2)), 1e-12);
  const double x = rng.uniform(-5, 5);
  Matrix a = herm_expm(-pauli_z() / 2, x) * herm_expm(-pauli_z() / 2, -x);
  EXPECT_LT(max_abs(a - Matrix::Identity(2, 2)), 1e-12);
}

TEST(HermExpm, MatchesTaylorSeries) {
  // Oracle: truncated power series of e^{iHt} with a small norm.
  Rng rng(4);
  Matrix g = ginibre(3, 3, rng);
  Matrix h = (g + g.adjoint()) * 0.1;
  const double t = 0.7;
  Matrix term = Matrix::Identity(3, 3), sum = Matrix::Identity(3, 3);
  for (int k = 1; k < 40; ++k) {
    term = term * (kI * t * h) / static_cast<double>(k);
    sum += term;
  }
  EXPECT_LT(max_abs(herm_expm(h, t) - sum), 1e-13);
}

TEST(Haar, Unitary) {
  Rng rng(5);
  for (std::size_t d : {1u, 2u, 5u, 16u}) EXPECT_TRUE(is_unitary(haar_unitary(d, rng), 1e-10));
  EXPECT_THROW(haar_unitary(0, rng), std::invalid_argument);
}

TEST(Haar, FirstMoment) {
  Rng rng(6);
  double acc = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) acc += std::norm(haar_unitary(4, rng)(0, 0));
  EXPECT_NEAR(acc / n, 0.25, 0.01);
}

TEST(Haar, SecondMoment) {
  Rng rng(7);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += std::pow(std::norm(haar_unitary(2, rng)(1, 0)), 2);
  EXPECT_NEAR(acc / n, 1.0 / 3.0, 0.01);
}

TEST(Haar, StateMatchesFirstColumnStatistics) {
  Rng rng(8);
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) acc += std::pow(std::norm(haar_state(2, rng)(0)), 2);
  EXPECT_NEAR(acc / n, 1.0 / 3.0, 0.01);
}

TEST(PartialTrace, Examples) {
  Rng rng(9);
  Matrix ga = ginibre(2, 2, rng), gb = ginibre(3, 3, rng);
  Matrix ra = ga * ga.adjoint(), rb = gb * gb.adjoint();
  ra /= ra.trace();
  rb /= rb.trace();
  const std::vector<std::size_t> dims{2, 3};
  EXPECT_LT(max_abs(partial_trace(kron(ra, rb), std::vector<std::size_t>{0}, dims) - ra), 1e-14);
  EXPECT_LT(max_abs(partial_trace(kron(ra, rb), std::vector<std::size_t>{1}, dims) - rb), 1e-14);

  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = 1 / std::sqrt(2.0);
  const std::vector<std::size_t> qq{2, 2};
  Matrix bell = phi * phi.adjoint();
  EXPECT_LT(max_abs(partial_trace(bell, std::vector<std::size_t>{1}, qq) - Matrix::Identity(2, 2) / 2.0), 1e-15);
  EXPECT_LT(max_abs(partial_trace(Matrix::Identity(4, 4) / 4.0, std::vector<std::size_t>{1}, qq) -
                    Matrix::Identity(2, 2) / 2.0),
            1e-15);
}

TEST(PartialTrace, MiddleSubsystemAgainstKron) {
  Rng rng(10);
  std::vector<Matrix> f;
  for (int k = 0; k < 3; ++k) {
    Matrix g = ginibre(2, 2, rng);
    Matrix r = g * g.adjoint();
    f.push_back(r / r.trace());
  }
  Matrix full = kron(kron(f[0], f[1]), f[2]);
  const std::vector<std::size_t> dims{2, 2, 2};
  EXPECT_LT(max_abs(partial_trace(full, std::vector<std::size_t>{1}, dims) - f[1]), 1e-14);
  EXPECT_LT(max_abs(partial_trace(full, std::vector<std::size_t>{0, 2}, dims) - kron(f[0], f[2])), 1e-14);
}

TEST(PartialTrace, RejectsMismatch) {
  const std::vector<std::size_t> dims{2, 3};
  EXPECT_THROW(partial_trace(Matrix::Identity(4, 4), std::vector<std::size_t>{0}, dims), std::invalid_argument);
}

TEST(SvdRank, Examples) {
  EXPECT_EQ(svd_rank(Matrix::Identity(4, 4), 1e-10), 4u);
  Rng rng(11);
  Vector a = ginibre(5, 1, rng).col(0), b = ginibre(3, 1, rng).col(0);
  EXPECT_EQ(svd_rank(a * b.adjoint(), 1e-10), 1u);
  EXPECT_EQ(svd_rank(Matrix::Zero(3, 3)), 0u);
}

TEST(Entropy, RelativeEntropyExamples) {
  EXPECT_NEAR(relative_entropy(Matrix::Identity(4, 4) / 4.0, Matrix::Identity(4, 4) / 4.0), 0.0, 1e-12);
  Rng rng(12);
  Vector psi = haar_state(8, rng);
  EXPECT_NEAR(relative_entropy(psi * psi.adjoint(), Matrix::Identity(8, 8) / 8.0), 3.0, 1e-9);
  Matrix r = Matrix::Zero(2, 2);
  r(0, 0) = 0.75;
  r(1, 1) = 0.25;
  const double h = -0.75 * std::log2(0.75) - 0.25 * std::log2(0.25);
  EXPECT_NEAR(relative_entropy(r, Matrix::Identity(2, 2) / 2.0), 1 - h, 1e-12);
  EXPECT_NEAR(relative_entropy(r, Matrix::Identity(2, 2) / 2.0), 0.1887, 1e-4);
}

TEST(Entropy, SupportViolationIsInfinite) {
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 1;
  EXPECT_TRUE(std::isinf(relative_entropy(Matrix::Identity(2, 2) / 2.0, sigma)));
}

TEST(Entropy, Renyi2Examples) {
  EXPECT_NEAR(renyi2_relative_entropy(Matrix::Identity(4, 4) / 4.0, 4), 0.0, 1e-14);
  Rng rng(13);
  Vector psi = haar_state(16, rng);
  EXPECT_NEAR(renyi2_relative_entropy(psi * psi.adjoint(), 16), 4.0, 1e-12);
  Matrix r = Matrix::Zero(4, 4);
  r(0, 0) = r(1, 1) = 0.5;
  EXPECT_NEAR(renyi2_relative_entropy(r, 4), 1.0, 1e-14);
}

TEST(Entropy, Renyi2DominatesVonNeumannDivergence) {
  // D(rho || I/d) <= D_2(rho || I/d) for every state.
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix g = ginibre(4, 4, rng);
    Matrix r = g * g.adjoint();
    r /= r.trace();
    EXPECT_LE(relative_entropy(r, Matrix::Identity(4, 4) / 4.0), renyi2_relative_entropy(r, 4) + 1e-12);
  }
}

TEST(Pauli, ParseAndPrint) {
  auto p = PauliString::parse("XYZI");
  EXPECT_EQ(p.str(), "XYZI");
  EXPECT_EQ(p.weight(), 3u);
  EXPECT_EQ(p.support(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(PauliString::parse("XQ"), std::invalid_argument);
  EXPECT_THROW(PauliString::parse(""), std::invalid_argument);
}

TEST(Pauli, MatrixMatchesKron) {
  Matrix y(2, 2);
  y << 0, -kI, kI, 0;
  Matrix expect = kron(kron(pauli_x(), y), pauli_z());
  EXPECT_EQ(max_abs(PauliString::parse("XYZ").matrix() - expect), 0.0);
}

TEST(Pauli, AlgebraicProperties) {
  for (std::uint64_t code = 0; code < 64; ++code) {
    const auto p = PauliString::from_index(code, 3);
    const Matrix m = p.matrix();
    EXPECT_TRUE(is_hermitian(m));
    EXPECT_TRUE(is_unitary(m));
    EXPECT_NEAR(std::abs(m.trace()), p.is_identity() ? 8.0 : 0.0, 1e-14);
    EXPECT_NEAR((m * m).trace().real(), 8.0, 1e-14);
  }
}

TEST(Pauli, FastPathsMatchDense) {
  Rng rng(15);
  const auto p = PauliString::parse("YXZ");
  Matrix g = ginibre(8, 8, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  EXPECT_NEAR(p.expectation(rho), (p.matrix() * rho).trace().real(), 1e-13);
  Vector psi = haar_state(8, rng);
  EXPECT_NEAR(p.expectation(psi), (psi.adjoint() * p.matrix() * psi)(0, 0).real(), 1e-13);
  Matrix v = ginibre(16, 3, rng);
  Matrix dense = kron(p.matrix(), Matrix::Identity(2, 2)) * v;
  EXPECT_LT(max_abs(p.apply_left_extended(v, 2) - dense), 1e-13);
  EXPECT_EQ(p.extended(2).str(), "YXZII");
}

TEST(Pauli, RandomDistinct) {
  Rng rng(16);
  auto ps = random_paulis(2, 15, rng);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_FALSE(ps[i].is_identity());
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(ps[i] == ps[j]);
  }
  EXPECT_THROW(random_paulis(2, 16, rng), std::invalid_argument);
}
