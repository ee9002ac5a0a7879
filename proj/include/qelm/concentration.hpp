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
 * Exponential concentration experiments and bound evaluators.
 *
 * The second-moment bounds all share one shape. For states rho_i drawn from
 * an ensemble and a Hermitian O,
 *
 *   E[Tr(O rho)^2] = Tr[(O (x) O) V_Haar(rho_ref^{(x)2})] - Tr[(O (x) O) A],
 *   A = V_Haar(rho_ref^{(x)2}) - E[rho^{(x)2}],
 *
 * and |Tr[(O (x) O) A]| <= ||O||_inf^2 ||A||_1. The Haar twirl of rho^{(x)2} is
 * a I + b SWAP with
 *
 *   a = (1 - P/d) / (d^2 - 1),  b = (P - 1/d) / (d^2 - 1),  P = Tr rho^2,
 *
 * so the first term is a Tr[O]^2 + b Tr[O^2]. Using the empirical ensemble for
 * both the variance and ||A||_1 makes the check exact rather than statistical.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qelm/encoding.hpp"
#include "qelm/fourier.hpp"
#include "qelm/gates.hpp"
#include "qelm/linalg.hpp"
#include "qelm/pauli.hpp"
#include "qelm/reservoir.hpp"
#include "qelm/rng.hpp"
#include "qelm/state.hpp"

namespace qelm {

// ---------------------------------------------------------------------------
// Statistics

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean_of: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("sample_variance: need at least two samples");
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// Variance with 1/N normalization.
inline double population_variance(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  return sample_variance(v) * (n - 1) / n;
}

inline double standard_error(const std::vector<double>& v) {
  return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

inline constexpr std::size_t kBootstrapResamples = 200;

/// Bootstrap standard error of an arbitrary statistic.
inline double bootstrap_stderr(const std::vector<double>& v, const std::function<double(const std::vector<double>&)>& stat,
                               Rng& rng, std::size_t resamples = kBootstrapResamples) {
  if (v.size() < 2 || resamples < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> stats, draw(v.size());
  stats.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& d : draw) d = v[rng.below(v.size())];
    stats.push_back(stat(draw));
  }
  return std::sqrt(sample_variance(stats));
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  return {sxy / sxx, my - sxy / sxx * mx};
}

// ---------------------------------------------------------------------------
// Reports and table rows

struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double first_term = 0.0;
  double eps_term = 0.0;
  double epsilon = 0.0;
  double obs_norm = 0.0;
  double entropy = 0.0;
  bool satisfied = false;

  static constexpr double kSlack = 1e-9;

  void finalize() { satisfied = lhs <= rhs + kSlack; }
};

/// One line of a concentration CSV.
struct ConcentrationRow {
  std::string experiment;
  int n_accessible = 0;
  int n_hidden = 0;
  int depth = 0;
  double noise_p = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::string statistic;
  double value = 0.0;
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  bool satisfied = true;
};

enum class SweepQuantity { VarOverInputs, VarOverReservoirs, NoiseDistance, GlobalMeasVar };

struct SweepConfig {
  SweepQuantity quantity = SweepQuantity::VarOverInputs;
  std::vector<std::size_t> n_accessible{2, 3, 4};
  std::size_t n_hidden = 0;
  std::vector<std::size_t> depths{1};
  EncodingScheme encoding = EncodingScheme::Layered;
  ReservoirSpec reservoir = ReservoirSpec::identity();
  std::string observable = "ZZ";  // on the first accessible qubits, padded with I
  std::size_t n_samples = 500;
  double x_lo = -std::numbers::pi;
  double x_hi = std::numbers::pi;
  double x_fixed = 0.7;  // input used when the reservoir is the random variable
  std::uint64_t seed = 1;
  std::size_t bootstrap = kBootstrapResamples;

  void validate() const {
    if (n_samples < 100) throw std::invalid_argument("SweepConfig: n_samples must be >= 100");
    if (n_accessible.empty() || depths.empty()) throw std::invalid_argument("SweepConfig: ranges must be nonempty");
    for (auto n : n_accessible)
      if (n == 0 || n + n_hidden > 12) throw std::invalid_argument("SweepConfig: qubit count outside [1, 12]");
    if (!(x_lo < x_hi)) throw std::invalid_argument("SweepConfig: empty input interval");
    if (observable.empty()) throw std::invalid_argument("SweepConfig: empty observable");
  }
};

/// Pad a Pauli prefix with identities to n qubits.
inline PauliString padded_pauli(const std::string& prefix, std::size_t n) {
  if (prefix.size() > n) throw std::invalid_argument("observable '" + prefix + "' longer than the register");
  return PauliString::parse(prefix + std::string(n - prefix.size(), 'I'));
}

inline EncodingSpec make_encoding(EncodingScheme scheme, std::size_t n_a, std::size_t depth, std::uint64_t seed) {
  switch (scheme) {
    case EncodingScheme::PauliReupload: return EncodingSpec::pauli(n_a);
    case EncodingScheme::Exponential: return EncodingSpec::exponential(n_a);
    case EncodingScheme::Layered: return EncodingSpec::layered(n_a, depth, seed);
    default: throw std::invalid_argument("make_encoding: scheme needs explicit eigenvalues");
  }
}

// ---------------------------------------------------------------------------
// Second-moment machinery

/// Coefficients (a, b) of the Haar twirl a I + b SWAP of rho^{(x)2}.
inline std::pair<double, double> haar_twirl_coefficients(double purity, std::size_t d) {
  const double dd = static_cast<double>(d);
  if (d == 1) return {purity, 0.0};
  return {(1.0 - purity / dd) / (dd * dd - 1.0), (purity - 1.0 / dd) / (dd * dd - 1.0)};
}

/// Dense V_Haar(rho^{(x)2}) on d^2 dimensions.
inline Matrix haar_second_moment(const Matrix& rho) {
  const std::size_t d = static_cast<std::size_t>(rho.rows());
  const auto [a, b] = haar_twirl_coefficients((rho * rho).trace().real(), d);
  Matrix m = Matrix::Identity(d * d, d * d) * a;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i * d + j, j * d + i) += b;
  return m;
}

/// ||V_Haar(rho_ref^{(x)2}) - (1/N) sum_i rho_i^{(x)2}||_1.
inline double twirl_gap(const std::vector<Matrix>& states, const Matrix& rho_ref) {
  if (states.empty()) throw std::invalid_argument("twirl_gap: empty ensemble");
  const std::size_t d = static_cast<std::size_t>(rho_ref.rows());
  if (d > 64) throw std::invalid_argument("twirl_gap: dimension above 2^6 is outside the budget");
  Matrix avg = Matrix::Zero(d * d, d * d);
  for (const auto& s : states) avg += kron(s, s);
  avg /= static_cast<double>(states.size());
  return trace_norm(haar_second_moment(rho_ref) - avg);
}

struct ExpressibilityResult {
  double epsilon = 0.0;
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
};

using UnitarySampler = std::function<Matrix(Rng&)>;

/// Trace-norm distance of a unitary ensemble's second moment from Haar on rho0^{(x)2}.
inline ExpressibilityResult expressibility_measure(const UnitarySampler& sampler, const Matrix& rho0, std::size_t n_mc,
                                                   Rng& rng, std::size_t bootstrap = 0) {
  if (n_mc == 0) throw std::invalid_argument("expressibility_measure: n_mc must be >= 1");
  std::vector<Matrix> states;
  states.reserve(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    const Matrix u = sampler(rng);
    states.push_back(u * rho0 * u.adjoint());
  }
  ExpressibilityResult r;
  r.epsilon = twirl_gap(states, rho0);
  if (bootstrap >= 2) {
    std::vector<double> eps;
    std::vector<Matrix> draw(states.size());
    for (std::size_t b = 0; b < bootstrap; ++b) {
      for (auto& s : draw) s = states[rng.below(states.size())];
      eps.push_back(twirl_gap(draw, rho0));
    }
    r.stderr_ = std::sqrt(sample_variance(eps));
  }
  return r;
}

/// Variance of Tr[O rho_i] over an ensemble against the Haar second moment plus
/// the measured twirl gap. lhs is the 1/N variance of the ensemble.
inline BoundReport ensemble_variance_bound(const std::vector<Matrix>& states, const Matrix& rho_ref, const Matrix& obs) {
  if (states.size() < 2) throw std::invalid_argument("ensemble_variance_bound: need at least two states");
  std::vector<double> vals;
  for (const auto& s : states) vals.push_back(obs.cwiseProduct(s.transpose()).sum().real());
  BoundReport r;
  r.lhs = population_variance(vals);
  const std::size_t d = static_cast<std::size_t>(obs.rows());
  const auto [a, b] = haar_twirl_coefficients((rho_ref * rho_ref).trace().real(), d);
  const double tr = obs.trace().real(), tr2 = (obs * obs).trace().real();
  r.first_term = a * tr * tr + b * tr2;
  r.epsilon = twirl_gap(states, rho_ref);
  r.obs_norm = operator_norm(obs);
  r.eps_term = r.epsilon * r.obs_norm * r.obs_norm;
  r.rhs = r.first_term + r.eps_term;
  r.finalize();
  return r;
}

// ---------------------------------------------------------------------------
// Encoding-induced concentration

/// Var_x <O>_x for O on the first accessible qubits, one row per (n_A, depth).
inline std::vector<ConcentrationRow> var_over_inputs(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<ConcentrationRow> rows;
  Rng master(cfg.seed);
  std::uint64_t task = 0;
  for (std::size_t n_a : cfg.n_accessible)
    for (std::size_t depth : cfg.depths) {
      Rng rng = master.derive(task++);
      const std::size_t n = n_a + cfg.n_hidden;
      const auto enc = make_encoding(cfg.encoding, n_a, depth, rng.engine()());
      const Matrix u_r = realize(cfg.reservoir, n, rng);
      const PauliString obs = padded_pauli(cfg.observable, n);
      const Matrix reduced = reduced_observable(u_r, obs, enc.dim());
      Vector zero = Vector::Zero(enc.dim());
      zero(0) = 1.0;
      std::vector<double> vals;
      vals.reserve(cfg.n_samples);
      for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        Vector psi = zero;
        apply_encoding(enc, rng.uniform(cfg.x_lo, cfg.x_hi), psi);
        vals.push_back(obs.is_identity() ? 1.0 : (psi.adjoint() * reduced * psi)(0, 0).real());
      }
      ConcentrationRow row;
      row.experiment = "var_over_inputs";
      row.n_accessible = static_cast<int>(n_a);
      row.n_hidden = static_cast<int>(cfg.n_hidden);
      row.depth = static_cast<int>(depth);
      row.seed = cfg.seed;
      row.n_samples = cfg.n_samples;
      row.statistic = "var_x";
      row.value = sample_variance(vals);
      row.stderr_ = bootstrap_stderr(vals, sample_variance, rng, cfg.bootstrap);
      rows.push_back(row);
    }
  return rows;
}

/// Theorem-style check for the encoding ensemble {U(x_i)}: measured Var_x
/// against (a Tr[O~]^2 + b Tr[O~^2]) + eps1 ||O~||^2 with O~ the reduced operator.
inline BoundReport encoding_bound(const EncodingSpec& enc, const Matrix& u_r, const Matrix& obs, const Matrix& rho0,
                                  const std::vector<double>& xs) {
  const Matrix reduced = reduced_observable(u_r, obs, enc.dim());
  std::vector<Matrix> states;
  states.reserve(xs.size());
  for (double x : xs) states.push_back(encoded_state(enc, x, rho0));
  return ensemble_variance_bound(states, rho0, reduced);
}

// ---------------------------------------------------------------------------
// Reservoir-induced concentration

/// Var over reservoirs of <O>_x at fixed x. Haar reservoirs use the fact that
/// U_R|psi> is a Haar-random state for any fixed |psi>.
inline std::vector<ConcentrationRow> var_over_reservoirs(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<ConcentrationRow> rows;
  Rng master(cfg.seed);
  std::uint64_t task = 0;
  for (std::size_t n_a : cfg.n_accessible) {
    Rng rng = master.derive(task++);
    const std::size_t n = n_a + cfg.n_hidden;
    const std::size_t d = std::size_t{1} << n;
    const PauliString obs = padded_pauli(cfg.observable, n);
    const std::size_t depth = cfg.depths.front();
    const auto enc = make_encoding(cfg.encoding, n_a, depth, rng.engine()());
    Vector psi = Vector::Zero(d);
    {
      Vector acc = DensityMatrix::plus_state(n_a).matrix().col(0) * std::sqrt(static_cast<double>(enc.dim()));
      apply_encoding(enc, cfg.x_fixed, acc);
      const std::size_t d_h = std::size_t{1} << cfg.n_hidden;
      for (std::size_t i = 0; i < enc.dim(); ++i) psi(i * d_h) = acc(i);
    }
    std::vector<double> vals;
    vals.reserve(cfg.n_samples);
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
      if (cfg.reservoir.kind == ReservoirKind::Haar) {
        vals.push_back(obs.expectation(haar_state(d, rng)));
      } else {
        const Vector out = realize(cfg.reservoir, n, rng) * psi;
        vals.push_back(obs.expectation(out));
      }
    }
    ConcentrationRow row;
    row.experiment = "var_over_reservoirs";
    row.n_accessible = static_cast<int>(n_a);
    row.n_hidden = static_cast<int>(cfg.n_hidden);
    row.depth = static_cast<int>(depth);
    row.seed = cfg.seed;
    row.n_samples = cfg.n_samples;
    row.statistic = "var_reservoir";
    row.value = sample_variance(vals);
    row.stderr_ = bootstrap_stderr(vals, sample_variance, rng, cfg.bootstrap);
    const double dd = static_cast<double>(d);
    const double tr = obs.is_identity() ? dd : 0.0;
    row.bound = (tr * tr + dd) / (dd * (dd + 1)) - (tr / dd) * (tr / dd);
    row.satisfied = std::abs(row.value - row.bound) <= 3 * row.stderr_;
    rows.push_back(row);
  }
  return rows;
}

/// Reservoir-ensemble check at fixed input: states U_j sigma U_j^dag with
/// sigma = rho(x) (x) |0><0|, bounded by the Haar term plus the twirl gap.
inline BoundReport reservoir_bound(const std::vector<Matrix>& reservoirs, const Matrix& sigma, const Matrix& obs) {
  std::vector<Matrix> states;
  states.reserve(reservoirs.size());
  for (const auto& u : reservoirs) states.push_back(u * sigma * u.adjoint());
  return ensemble_variance_bound(states, sigma, obs);
}

// ---------------------------------------------------------------------------
// Entanglement-induced concentration

/// Reduced state on `subset` of a pure n-qubit state.
inline Matrix reduced_state(const Vector& psi, std::size_t n, const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> dims(n, 2);
  return partial_trace(psi * psi.adjoint(), subset, dims);
}

/// |Tr[O rho] - Tr[O]/2^n| <= ||O_k|| sqrt(2 ln 2 S(rho_k || I/2^k)) for O = O_k (x) I
/// acting on `subset` (ascending; O_k's tensor order follows it).
inline BoundReport entanglement_bound_check(const Matrix& rho, const Matrix& obs_local, const std::vector<std::size_t>& subset) {
  const std::size_t n = qubits_for_dim(static_cast<std::size_t>(rho.rows()));
  if (!std::is_sorted(subset.begin(), subset.end()) || subset.empty() || subset.back() >= n)
    throw std::invalid_argument("entanglement_bound_check: subset must be ascending qubit indices");
  const std::size_t dk = std::size_t{1} << subset.size();
  if (static_cast<std::size_t>(obs_local.rows()) != dk)
    throw std::invalid_argument("entanglement_bound_check: observable does not match the subset");
  std::vector<std::size_t> dims(n, 2);
  const Matrix rho_k = partial_trace(rho, subset, dims);
  BoundReport r;
  r.lhs = std::abs((obs_local * rho_k).trace().real() - obs_local.trace().real() / static_cast<double>(dk));
  r.obs_norm = operator_norm(obs_local);
  r.entropy = relative_entropy(rho_k, Matrix::Identity(dk, dk) / static_cast<double>(dk));
  r.rhs = r.obs_norm * std::sqrt(2 * std::numbers::ln2 * r.entropy);
  r.first_term = r.rhs;
  r.finalize();
  return r;
}

/// Pauli observable on the full register; its support is the subset.
inline BoundReport entanglement_bound_check(const Matrix& rho, const PauliString& obs) {
  if (obs.is_identity()) {
    BoundReport r;
    r.obs_norm = 1.0;
    r.finalize();
    return r;
  }
  const auto support = obs.support();
  std::string letters;
  for (auto q : support) letters += obs.letter(q);
  return entanglement_bound_check(rho, PauliString::parse(letters).matrix(), support);
}

// ---------------------------------------------------------------------------
// Global measurements

enum class GlobalEncoding { Layered, Haar };

struct GlobalMeasurementResult {
  std::size_t n_accessible = 0;
  std::size_t n_hidden = 0;
  std::size_t depth = 0;
  double alpha = 1.0;
  double second_moment = 0.0;  // Monte Carlo E_x[<O>^2]
  double second_moment_stderr = 0.0;
  double variance = 0.0;  // Monte Carlo Var_x[<O>]
  double variance_stderr = 0.0;
  double exact_second_moment = std::numeric_limits<double>::quiet_NaN();
  double exact_variance = std::numeric_limits<double>::quiet_NaN();
  double predicted_haar = 0.0;  // alpha^2 (1/3)^{n_A}
  BoundReport bound;
};

/// Fully separable pipeline: rho0 = |0><0|^{n_A}, encoding (x) U_k(x_k) with an
/// independent input per qubit, product reservoir (x) V_k of single-qubit Haar
/// unitaries, and O = |m><m| with m drawn at random. The hidden qubits carry no
/// input, so they contribute alpha = prod_j |<m_j|V_j|0>|^2.
inline GlobalMeasurementResult global_measurement_experiment(std::size_t n_a, std::size_t n_h, std::size_t depth,
                                                             GlobalEncoding kind, std::size_t n_samples, Rng& rng,
                                                             bool identity_hidden = true) {
  if (n_a == 0 || n_a + n_h > 30) throw std::invalid_argument("global_measurement_experiment: bad register size");
  if (n_samples < 2) throw std::invalid_argument("global_measurement_experiment: need >= 2 samples");
  if (kind == GlobalEncoding::Layered && depth == 0) throw std::invalid_argument("global_measurement_experiment: depth >= 1");
  GlobalMeasurementResult r;
  r.n_accessible = n_a;
  r.n_hidden = n_h;
  r.depth = depth;

  std::vector<int> m(n_a + n_h);
  for (auto& b : m) b = static_cast<int>(rng.below(2));
  std::vector<Gate2> v(n_a + n_h);
  for (std::size_t k = 0; k < n_a + n_h; ++k) v[k] = haar_unitary(2, rng);
  r.alpha = 1.0;
  for (std::size_t j = n_a; j < n_a + n_h; ++j) {
    if (identity_hidden) {
      v[j] = Gate2::Identity();
      m[j] = 0;
    }
    r.alpha *= std::norm(v[j](m[j], 0));
  }
  std::vector<std::vector<double>> theta(n_a, std::vector<double>(depth)), phi(n_a, std::vector<double>(depth));
  for (std::size_t k = 0; k < n_a; ++k)
    for (std::size_t l = 0; l < depth; ++l) {
      theta[k][l] = rng.uniform(0.0, 2 * std::numbers::pi);
      phi[k][l] = rng.uniform(0.0, 2 * std::numbers::pi);
    }
  auto single_qubit = [&](std::size_t k, double x) {
    Gate2 u = Gate2::Identity();
    for (std::size_t l = 0; l < depth; ++l) u = gates::ry(theta[k][l]) * gates::rz(x) * gates::ry(phi[k][l]) * u;
    return u;
  };
  // p_k = |<m_k| V_k U_k |0>|^2
  auto p_of = [&](std::size_t k, const Gate2& u) { return std::norm((v[k] * u)(m[k], 0)); };

  std::vector<double> values, squares;
  values.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    double prod = r.alpha;
    for (std::size_t k = 0; k < n_a; ++k) {
      const Gate2 u = kind == GlobalEncoding::Haar ? Gate2(haar_unitary(2, rng))
                                                   : single_qubit(k, rng.uniform(-std::numbers::pi, std::numbers::pi));
      prod *= p_of(k, u);
    }
    values.push_back(prod);
    squares.push_back(prod * prod);
  }
  r.second_moment = mean_of(squares);
  r.second_moment_stderr = standard_error(squares);
  r.variance = sample_variance(values);
  r.variance_stderr = bootstrap_stderr(values, sample_variance, rng);
  r.predicted_haar = r.alpha * r.alpha * std::pow(1.0 / 3.0, static_cast<double>(n_a));

  if (kind == GlobalEncoding::Layered) {
    // Each U_k(x) has integer frequencies up to depth, so an equispaced grid of
    // 4 depth + 4 points integrates p_k, p_k^2 and rho_k^{(x)2} exactly.
    const std::size_t grid = 4 * depth + 4;
    Matrix rho0 = Matrix::Zero(2, 2);
    rho0(0, 0) = 1.0;
    double m1 = r.alpha, m2 = r.alpha * r.alpha, bound = r.alpha;
    double eps_max = 0.0;
    for (std::size_t k = 0; k < n_a; ++k) {
      std::vector<Matrix> states;
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t g = 0; g < grid; ++g) {
        const double x = -std::numbers::pi + 2 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(grid);
        const Gate2 u = single_qubit(k, x);
        const double p = p_of(k, u);
        s1 += p;
        s2 += p * p;
        states.push_back(Matrix(u) * rho0 * Matrix(u).adjoint());
      }
      m1 *= s1 / static_cast<double>(grid);
      m2 *= s2 / static_cast<double>(grid);
      const double eps = twirl_gap(states, rho0);
      eps_max = std::max(eps_max, eps);
      bound *= 1.0 / 3.0 + eps;  // Tr[(P (x) P) V_Haar] = 2 / (d (d + 1)) for a pure rho0 and rank-1 P
    }
    r.exact_second_moment = m2;
    r.exact_variance = m2 - m1 * m1;
    r.bound.lhs = r.exact_variance;
    r.bound.rhs = bound;
    r.bound.first_term = r.alpha * std::pow(1.0 / 3.0, static_cast<double>(n_a));
    r.bound.epsilon = eps_max;
    r.bound.obs_norm = 1.0;
    r.bound.finalize();
  } else {
    r.exact_second_moment = r.predicted_haar;
    // p_k is uniform on [0, 1] for a Haar single-qubit unitary: E p = 1/2, E p^2 = 1/3.
    r.exact_variance = r.predicted_haar - r.alpha * r.alpha * std::pow(0.25, static_cast<double>(n_a));
    r.bound.lhs = r.exact_variance;
    r.bound.rhs = r.alpha * std::pow(1.0 / 3.0, static_cast<double>(n_a));
    r.bound.first_term = r.bound.rhs;
    r.bound.obs_norm = 1.0;
    r.bound.finalize();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Noise-induced concentration

struct NoiseConfig {
  std::size_t n_accessible = 7;
  std::size_t n_hidden = 1;
  std::size_t max_layers = 20;
  std::vector<double> noise_p{0.05, 0.1, 0.2};
  std::size_t n_inputs = 20;
  std::string observable = "Z";
  ReservoirSpec reservoir = ReservoirSpec::haar(5);
  std::uint64_t seed = 1;
};

struct NoisePoint {
  double p = 0.0;
  std::size_t layers = 0;
  double mean_distance = 0.0;
  double median_distance = 0.0;
  double stderr_ = 0.0;
  double state_distance = 0.0;  // mean ||rho_L - I/d||_2, non-increasing in L
  BoundReport bound;
};

struct NoiseResult {
  std::vector<NoisePoint> points;  // ordered by p, then layers
  std::vector<double> slopes;      // fitted d ln(mean distance) / dL per p
  double mu = 0.0;
  double obs_norm = 0.0;
};

/// Layered encoding with depolarizing noise on every accessible qubit before the
/// first layer and after each layer (L + 1 channel applications for L layers),
/// then the reservoir and O. Distances are |<O>_x - Tr[O~]/2^{n_A}|.
inline NoiseResult noise_concentration_experiment(const NoiseConfig& cfg) {
  const std::size_t n_a = cfg.n_accessible;
  if (n_a == 0 || n_a + cfg.n_hidden > 10) throw std::invalid_argument("noise experiment: register above the density-matrix budget");
  if (cfg.max_layers == 0 || cfg.n_inputs < 2) throw std::invalid_argument("noise experiment: need layers >= 1 and >= 2 inputs");
  Rng rng(cfg.seed);
  const std::size_t n = n_a + cfg.n_hidden;
  const auto enc = EncodingSpec::layered(n_a, cfg.max_layers, rng.engine()());
  const Matrix u_r = realize(cfg.reservoir, n, rng);
  const Matrix reduced = reduced_observable(u_r, padded_pauli(cfg.observable, n), enc.dim());
  const Matrix reduced_t = reduced.transpose();
  const double d_a = static_cast<double>(enc.dim());
  NoiseResult out;
  out.mu = reduced.trace().real() / d_a;
  out.obs_norm = operator_norm(reduced);
  std::vector<double> xs;
  for (std::size_t i = 0; i < cfg.n_inputs; ++i) xs.push_back(rng.uniform(-std::numbers::pi, std::numbers::pi));
  const double s2 = static_cast<double>(n_a);  // pure |0...0>: log2(d Tr rho^2) = n_A
  const double b = 1.0 / (2 * std::numbers::ln2);

  for (double p : cfg.noise_p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise experiment: p must lie in [0, 1]");
    const NoiseSpec noise = NoiseSpec::depolarizing(p);
    const double q = noise.q();
    std::vector<std::vector<double>> dist(cfg.max_layers + 1);
    std::vector<double> hs(cfg.max_layers + 1, 0.0);
    for (double x : xs) {
      Matrix rho = Matrix::Zero(enc.dim(), enc.dim());
      rho(0, 0) = 1.0;
      for (std::size_t k = 0; k < n_a; ++k) apply_pauli_noise(rho, n_a, k, noise);
      for (std::size_t l = 0; l < cfg.max_layers; ++l) {
        apply_layer(enc, l, x, rho);
        for (std::size_t k = 0; k < n_a; ++k) apply_pauli_noise(rho, n_a, k, noise);
        dist[l + 1].push_back(std::abs(reduced_t.cwiseProduct(rho).sum().real() - out.mu));
        hs[l + 1] += std::sqrt(std::max(0.0, rho.squaredNorm() - 1.0 / d_a));
      }
    }
    std::vector<double> ls, logs;
    for (std::size_t l = 1; l <= cfg.max_layers; ++l) {
      NoisePoint pt;
      pt.p = p;
      pt.layers = l;
      pt.mean_distance = mean_of(dist[l]);
      auto sorted = dist[l];
      std::sort(sorted.begin(), sorted.end());
      pt.median_distance = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                             : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
      pt.stderr_ = standard_error(dist[l]);
      pt.state_distance = hs[l] / static_cast<double>(xs.size());
      pt.bound.lhs = pt.mean_distance;
      pt.bound.obs_norm = out.obs_norm;
      pt.bound.entropy = s2;
      pt.bound.rhs = out.obs_norm * std::sqrt(std::pow(q, b * static_cast<double>(l + 1)) * s2 / b);
      pt.bound.first_term = pt.bound.rhs;
      pt.bound.finalize();
      if (q >= 1.0) pt.bound.satisfied = false;  // vacuous
      out.points.push_back(pt);
      if (pt.mean_distance > 0.0) {
        ls.push_back(static_cast<double>(l));
        logs.push_back(std::log(pt.mean_distance));
      }
    }
    out.slopes.push_back(ls.size() >= 2 ? fit_line(ls, logs).slope : 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fourier-coefficient statistics under Haar reservoirs

struct HaarCoefficientStats {
  std::size_t d = 0;         // full dimension 2^n
  std::size_t d_accessible = 0;
  double alpha = 0.0;        // alpha_uv = 1/d_A
  std::size_t n_samples = 0;
  // Means of a_uv (real, imaginary) with standard errors, row-major over (u, v).
  std::vector<double> mean_re, mean_im, mean_re_se, mean_im_se;
  double var_offdiag = 0.0, var_offdiag_se = 0.0, var_offdiag_expected = 0.0;
  double var_diag = 0.0, var_diag_se = 0.0, var_diag_expected = 0.0;
  double cov_diag = 0.0, cov_diag_se = 0.0, cov_diag_expected = 0.0;
  double cov_distinct_re = 0.0, cov_distinct_im = 0.0, cov_distinct_se_re = 0.0, cov_distinct_se_im = 0.0;
  bool has_distinct = false;
};

/// a_uv = alpha_uv <u,0| U_R^dag O U_R |v,0> with rho0 = |+><+|^{n_A}.
inline HaarCoefficientStats haar_coefficient_stats(std::size_t n_a, std::size_t n_h, const PauliString& obs,
                                                   std::size_t n_samples, Rng& rng) {
  const std::size_t n = n_a + n_h;
  if (obs.num_qubits() != n) throw std::invalid_argument("haar_coefficient_stats: observable length must be n_A + n_H");
  if (n > 10) throw std::invalid_argument("haar_coefficient_stats: register above budget");
  if (n_samples < 2) throw std::invalid_argument("haar_coefficient_stats: need >= 2 samples");
  HaarCoefficientStats s;
  s.d = std::size_t{1} << n;
  s.d_accessible = std::size_t{1} << n_a;
  s.alpha = 1.0 / static_cast<double>(s.d_accessible);
  s.n_samples = n_samples;
  const std::size_t da = s.d_accessible;
  const double dd = static_cast<double>(s.d), a2 = s.alpha * s.alpha;
  const double tr = obs.is_identity() ? dd : 0.0;
  s.var_offdiag_expected = a2 * (dd * dd - tr * tr) / (dd * (dd * dd - 1));
  s.var_diag_expected = a2 * (tr * tr + dd) / (dd * (dd + 1)) - a2 * (tr / dd) * (tr / dd);
  s.cov_diag_expected = a2 * ((tr * tr * dd - dd) / (dd * (dd * dd - 1)) - (tr / dd) * (tr / dd));

  std::vector<std::vector<double>> re(da * da), im(da * da);
  std::vector<double> off, diag, cov, dist_re, dist_im;
  s.has_distinct = da >= 4;
  for (std::size_t t = 0; t < n_samples; ++t) {
    const Matrix u = haar_unitary(s.d, rng);
    const Matrix a = s.alpha * reduced_observable(u, obs, da);
    double so = 0.0, sd = 0.0, sc = 0.0;
    std::size_t co = 0, cc = 0;
    for (std::size_t i = 0; i < da; ++i)
      for (std::size_t j = 0; j < da; ++j) {
        re[i * da + j].push_back(a(i, j).real());
        im[i * da + j].push_back(a(i, j).imag());
        if (i != j) {
          so += std::norm(a(i, j));
          ++co;
          sc += a(i, i).real() * a(j, j).real();
          ++cc;
        }
      }
    const double mu_d = s.alpha * tr / dd;
    for (std::size_t i = 0; i < da; ++i) sd += std::pow(a(i, i).real() - mu_d, 2);
    off.push_back(so / static_cast<double>(co));
    diag.push_back(sd / static_cast<double>(da));
    cov.push_back(sc / static_cast<double>(cc) - mu_d * mu_d);
    if (s.has_distinct) {
      cplx acc = 0.0;
      std::size_t cnt = 0;
      for (std::size_t u1 = 0; u1 < da; ++u1)
        for (std::size_t v1 = 0; v1 < da; ++v1)
          for (std::size_t j1 = 0; j1 < da; ++j1)
            for (std::size_t k1 = 0; k1 < da; ++k1) {
              if (u1 == v1 || u1 == j1 || u1 == k1 || v1 == j1 || v1 == k1 || j1 == k1) continue;
              acc += a(u1, v1) * std::conj(a(j1, k1));
              ++cnt;
            }
      dist_re.push_back(acc.real() / static_cast<double>(cnt));
      dist_im.push_back(acc.imag() / static_cast<double>(cnt));
    }
  }
  for (std::size_t k = 0; k < da * da; ++k) {
    s.mean_re.push_back(mean_of(re[k]));
    s.mean_im.push_back(mean_of(im[k]));
    s.mean_re_se.push_back(standard_error(re[k]));
    s.mean_im_se.push_back(standard_error(im[k]));
  }
  s.var_offdiag = mean_of(off);
  s.var_offdiag_se = standard_error(off);
  s.var_diag = mean_of(diag);
  s.var_diag_se = standard_error(diag);
  s.cov_diag = mean_of(cov);
  s.cov_diag_se = standard_error(cov);
  if (s.has_distinct) {
    s.cov_distinct_re = mean_of(dist_re);
    s.cov_distinct_im = mean_of(dist_im);
    s.cov_distinct_se_re = standard_error(dist_re);
    s.cov_distinct_se_im = standard_error(dist_im);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Hypothesis testing between P = {p, 1-p} and Q = {1/2, 1/2}

/// Likelihood-ratio rule on N samples: decide P iff P^N(k) > Q^N(k), where k
/// counts +1 outcomes. Ties go to Q.
inline bool decide_p(double p, std::size_t n, std::size_t k) {
  const double lp = (k ? static_cast<double>(k) * std::log(p) : 0.0) +
                    (n - k ? static_cast<double>(n - k) * std::log1p(-p) : 0.0);
  const double lq = static_cast<double>(n) * std::log(0.5);
  if (p == 0.0 && k > 0) return false;
  if (p == 1.0 && k < n) return false;
  return lp > lq + 1e-12;
}

/// Exact success probability of the rule, equal priors: 1/2 + ||P^N - Q^N||_1 / 4.
inline double hypothesis_success_exact(double p, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    const double lp = lc + (k ? k * std::log(p) : 0.0) + (n - k ? (n - k) * std::log1p(-p) : 0.0);
    const double pp = (p == 0.0 && k > 0) || (p == 1.0 && k < n) ? 0.0 : std::exp(lp);
    const double qq = std::exp(lc + n * std::log(0.5));
    acc += decide_p(p, n, k) ? pp : qq;
  }
  return 0.5 * acc;
}

/// Simulated success rate: each trial picks P or Q with probability 1/2, draws N
/// samples and applies the likelihood-ratio rule.
inline double hypothesis_test_sim(double p_true, std::size_t n_samples, std::size_t n_trials, Rng& rng) {
  if (!(p_true >= 0.0 && p_true <= 1.0)) throw std::invalid_argument("hypothesis_test_sim: p must lie in [0, 1]");
  if (n_samples == 0 || n_trials == 0) throw std::invalid_argument("hypothesis_test_sim: counts must be positive");
  std::size_t correct = 0;
  for (std::size_t t = 0; t < n_trials; ++t) {
    const bool truth_p = rng.bernoulli(0.5);
    const double pr = truth_p ? p_true : 0.5;
    const std::size_t k = std::binomial_distribution<std::size_t>(n_samples, pr)(rng.engine());
    if (decide_p(p_true, n_samples, k) == truth_p) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n_trials);
}

}  // namespace qelm
