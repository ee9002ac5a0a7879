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

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qelm/linalg.hpp"

namespace qelm {

/// Tensor product of single-qubit Paulis. Text form is one letter per qubit
/// from {I, X, Y, Z}; the leftmost letter is qubit 0, which is also the most
/// significant bit of a computational basis index.
///
/// Stored as X and Z bit masks: P|b> = i^{#Y} (-1)^{popcount(b & z)} |b ^ x>.
class PauliString {
 public:
  PauliString() = default;

  static PauliString identity(std::size_t n) {
    PauliString p;
    p.n_ = n;
    return p;
  }

  static PauliString parse(std::string_view text) {
    if (text.empty() || text.size() > 30) throw std::invalid_argument("PauliString: length must be in [1, 30]");
    PauliString p;
    p.n_ = text.size();
    for (std::size_t q = 0; q < text.size(); ++q) {
      const std::uint32_t bit = 1u << (p.n_ - 1 - q);
      switch (text[q]) {
        case 'I': break;
        case 'X': p.x_ |= bit; break;
        case 'Y': p.x_ |= bit; p.z_ |= bit; break;
        case 'Z': p.z_ |= bit; break;
        default: throw std::invalid_argument("PauliString: invalid letter '" + std::string(1, text[q]) + "'");
      }
    }
    return p;
  }

  /// Build from the base-4 digits of `code` (0=I, 1=X, 2=Y, 3=Z); digit for
  /// qubit 0 is the most significant. Enumerates all 4^n strings for codes
  /// 0 .. 4^n - 1.
  static PauliString from_index(std::uint64_t code, std::size_t n) {
    PauliString p;
    p.n_ = n;
    for (std::size_t q = n; q-- > 0;) {
      const std::uint32_t bit = 1u << (n - 1 - q);
      switch (code & 3u) {
        case 1: p.x_ |= bit; break;
        case 2: p.x_ |= bit; p.z_ |= bit; break;
        case 3: p.z_ |= bit; break;
        default: break;
      }
      code >>= 2;
    }
    return p;
  }

  std::size_t num_qubits() const { return n_; }
  std::uint32_t x_mask() const { return x_; }
  std::uint32_t z_mask() const { return z_; }
  bool is_identity() const { return x_ == 0 && z_ == 0; }
  std::size_t weight() const { return static_cast<std::size_t>(std::popcount(x_ | z_)); }

  char letter(std::size_t q) const {
    const std::uint32_t bit = 1u << (n_ - 1 - q);
    const bool x = x_ & bit, z = z_ & bit;
    return x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
  }

  std::string str() const {
    std::string s(n_, 'I');
    for (std::size_t q = 0; q < n_; ++q) s[q] = letter(q);
    return s;
  }

  /// Qubits on which the string acts non-trivially.
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < n_; ++q)
      if (letter(q) != 'I') out.push_back(q);
    return out;
  }

  /// Phase of P|b>, i.e. <b ^ x| P |b>.
  cplx phase(std::uint64_t b) const {
    static constexpr cplx kPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int ny = std::popcount(x_ & z_);
    const int sign = std::popcount(static_cast<std::uint32_t>(b) & z_) & 1;
    return kPow[(ny + 2 * sign) & 3];
  }

  std::size_t dim() const { return std::size_t{1} << n_; }

  Matrix matrix() const {
    const std::size_t d = dim();
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t b = 0; b < d; ++b) m(b ^ x_, b) = phase(b);
    return m;
  }

  /// P * M for a matrix with dim() rows, without forming P.
  Matrix apply_left(const Matrix& m) const {
    if (static_cast<std::size_t>(m.rows()) != dim()) throw std::invalid_argument("PauliString::apply_left: dimension mismatch");
    Matrix out(m.rows(), m.cols());
    for (std::size_t b = 0; b < dim(); ++b) out.row(b ^ x_) = phase(b) * m.row(b);
    return out;
  }

  /// P (x) I_{d_tail} applied to the rows of m, where m has dim() * d_tail rows.
  Matrix apply_left_extended(const Matrix& m, std::size_t d_tail) const {
    if (static_cast<std::size_t>(m.rows()) != dim() * d_tail)
      throw std::invalid_argument("PauliString::apply_left_extended: dimension mismatch");
    Matrix out(m.rows(), m.cols());
    for (std::size_t b = 0; b < dim(); ++b) {
      const cplx ph = phase(b);
      out.middleRows((b ^ x_) * d_tail, d_tail) = ph * m.middleRows(b * d_tail, d_tail);
    }
    return out;
  }

  /// Tr[P rho] for a dim() x dim() matrix.
  double expectation(const Matrix& rho) const {
    cplx acc = 0.0;
    for (std::size_t b = 0; b < dim(); ++b) acc += phase(b) * rho(b, b ^ x_);
    return acc.real();
  }

  double expectation(const Vector& psi) const {
    cplx acc = 0.0;
    for (std::size_t b = 0; b < dim(); ++b) acc += std::conj(psi(b ^ x_)) * phase(b) * psi(b);
    return acc.real();
  }

  /// Append `extra` identity qubits on the right (e.g. the hidden register).
  PauliString extended(std::size_t extra) const {
    PauliString p;
    p.n_ = n_ + extra;
    p.x_ = x_ << extra;
    p.z_ = z_ << extra;
    return p;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.n_ == b.n_ && a.x_ == b.x_ && a.z_ == b.z_;
  }

  /// Dense code used for hashing and enumeration.
  std::uint64_t code() const { return (static_cast<std::uint64_t>(x_) << 32) | z_; }

 private:
  std::size_t n_ = 0;
  std::uint32_t x_ = 0;
  std::uint32_t z_ = 0;
};

/// `count` distinct non-identity Pauli strings on n qubits, drawn uniformly
/// without replacement.
inline std::vector<PauliString> random_paulis(std::size_t n, std::size_t count, Rng& rng) {
  const std::uint64_t total = (std::uint64_t{1} << (2 * n)) - 1;
  if (count > total) throw std::invalid_argument("random_paulis: more strings requested than exist");
  std::vector<PauliString> out;
  std::unordered_set<std::uint64_t> seen;
  while (out.size() < count) {
    const std::uint64_t code = 1 + rng.below(total);
    if (seen.insert(code).second) out.push_back(PauliString::from_index(code, n));
  }
  return out;
}

}  // namespace qelm
