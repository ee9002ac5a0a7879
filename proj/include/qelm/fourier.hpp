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
 * Fourier structure of QELM readouts.
 *
 * With a diagonal encoding U(x) = e^{iHx}, H = diag(mu), accessible initial
 * state rho0 = sum alpha_ij |i><j| and hidden register in |0>, a readout is
 *
 *   <O>_x = sum_{i,j} alpha_ij e^{i (mu_i - mu_j) x} <j,0| U_R^dag O U_R |i,0>
 *         = sum_{w in Omega} a_w e^{i w x},
 *
 * so the frequencies are the generator eigenvalue differences and each a_w
 * collects the pairs (i, j) with mu_i - mu_j = w. Everything here works on
 * the reduced operator  M = P0^dag U_R^dag O U_R P0  (d_A x d_A), where P0
 * embeds the accessible space as |i> -> |i, 0>.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qelm/encoding.hpp"
#include "qelm/linalg.hpp"
#include "qelm/pauli.hpp"

namespace qelm {

/// Absolute tolerance for deciding that two frequencies coincide.
inline constexpr double kFrequencyTolerance = 1e-9;

/// Sorted set of distinct real frequencies.
class FrequencySet {
 public:
  FrequencySet() = default;

  explicit FrequencySet(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    for (double v : values)
      if (values_.empty() || v - values_.back() > kFrequencyTolerance) values_.push_back(v);
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::optional<std::size_t> index_of(double w) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), w - kFrequencyTolerance);
    if (it != values_.end() && std::abs(*it - w) <= kFrequencyTolerance)
      return static_cast<std::size_t>(it - values_.begin());
    return std::nullopt;
  }

  bool contains(double w) const { return index_of(w).has_value(); }

  std::size_t nonnegative_count() const {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return v > -kFrequencyTolerance; }));
  }

  bool is_symmetric() const {
    return std::all_of(values_.begin(), values_.end(), [&](double v) { return contains(-v); });
  }

  bool same_as(const FrequencySet& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (std::abs(values_[i] - other.values_[i]) > kFrequencyTolerance) return false;
    return true;
  }

 private:
  std::vector<double> values_;
};

/// Frequencies reachable by a diagonal encoding. Product schemes are built as
/// the sumset of the per-qubit sets {-d_k, 0, d_k}, which avoids enumerating
/// all 4^n eigenvalue pairs.
inline FrequencySet frequency_set(const EncodingSpec& spec) {
  if (!spec.is_diagonal()) throw std::invalid_argument("frequency_set: encoding has no diagonal generator");
  if (spec.scheme() == EncodingScheme::Diagonal) {
    const RealVector mu = spec.generator_eigenvalues();
    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(mu.size() * mu.size()));
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      for (Eigen::Index j = 0; j < mu.size(); ++j) diffs.push_back(mu(i) - mu(j));
    return FrequencySet(std::move(diffs));
  }
  FrequencySet acc(std::vector<double>{0.0});
  for (const auto& [l1, l2] : spec.per_qubit_eigs()) {
    const double gap = l2 - l1;
    std::vector<double> next;
    next.reserve(acc.size() * 3);
    for (double w : acc.values())
      for (double step : {-gap, 0.0, gap}) next.push_back(w + step);
    acc = FrequencySet(std::move(next));
  }
  return acc;
}

/// Frequency vectors lambda_j - lambda_i for a vector input where component c
/// is encoded by a generator with eigenvalues per_component_eigs[c].
inline std::vector<std::vector<double>> multivariate_frequency_set(
    const std::vector<std::vector<double>>& per_component_eigs) {
  std::vector<std::vector<double>> out{{}};
  for (const auto& eigs : per_component_eigs) {
    if (eigs.empty()) throw std::invalid_argument("multivariate_frequency_set: component without eigenvalues");
    std::vector<double> diffs;
    for (double a : eigs)
      for (double b : eigs) diffs.push_back(a - b);
    const FrequencySet axis(std::move(diffs));
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out)
      for (double w : axis.values()) {
        auto v = prefix;
        v.push_back(w);
        next.push_back(std::move(v));
      }
    out = std::move(next);
  }
  return out;
}

/// Fourier coefficients of one real readout, aligned with a frequency set.
struct FourierSpectrum {
  FrequencySet frequencies;
  std::vector<cplx> coeffs;
  std::string observable_id;
  double tolerance = kFrequencyTolerance;

  std::size_t size() const { return coeffs.size(); }

  cplx coefficient(double w) const {
    const auto idx = frequencies.index_of(w);
    return idx ? coeffs[*idx] : cplx(0.0);
  }

  double evaluate(double x) const {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * std::exp(kI * (frequencies[k] * x));
    return acc.real();
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : coeffs) m = std::max(m, std::abs(c));
    return m;
  }

  /// Frequencies with |a_w| > rel_tol * max |a_w|.
  std::size_t nonzero_count(double rel_tol) const {
    const double cut = rel_tol * max_abs_coeff();
    if (cut == 0.0) return 0;
    return static_cast<std::size_t>(
        std::count_if(coeffs.begin(), coeffs.end(), [&](const cplx& c) { return std::abs(c) > cut; }));
  }
};

/// M = P0^dag U_R^dag O U_R P0, the readout operator seen by the accessible register.
inline Matrix reduced_observable(const Matrix& u_r, const Matrix& obs, std::size_t d_accessible) {
  if (u_r.rows() != u_r.cols() || obs.rows() != u_r.rows() || obs.cols() != u_r.cols())
    throw std::invalid_argument("reduced_observable: reservoir and observable dimensions differ");
  const std::size_t d = static_cast<std::size_t>(u_r.rows());
  if (d_accessible == 0 || d % d_accessible != 0)
    throw std::invalid_argument("reduced_observable: accessible dimension does not divide the total");
  const std::size_t d_hidden = d / d_accessible;
  Matrix v(d, d_accessible);
  for (std::size_t i = 0; i < d_accessible; ++i) v.col(i) = u_r.col(i * d_hidden);
  return v.adjoint() * obs * v;
}

/// Same as above for a Pauli string on the full register, without forming O.
inline Matrix reduced_observable(const Matrix& u_r, const PauliString& obs, std::size_t d_accessible) {
  const std::size_t d = static_cast<std::size_t>(u_r.rows());
  if (obs.dim() != d) throw std::invalid_argument("reduced_observable: Pauli string does not match the reservoir");
  if (d_accessible == 0 || d % d_accessible != 0)
    throw std::invalid_argument("reduced_observable: accessible dimension does not divide the total");
  const std::size_t d_hidden = d / d_accessible;
  Matrix v(d, d_accessible);
  for (std::size_t i = 0; i < d_accessible; ++i) v.col(i) = u_r.col(i * d_hidden);
  return v.adjoint() * obs.apply_left(v);
}

/// Coefficients from a reduced operator: a_w = sum_{mu_i - mu_j = w} alpha_ij M_ji.
inline FourierSpectrum spectrum_from_reduced(const Matrix& rho0, const EncodingSpec& spec, const Matrix& reduced,
                                             std::string observable_id = {}) {
  if (!spec.is_diagonal())
    throw std::invalid_argument("spectrum_direct: encoding is not diagonal in the computational basis");
  const std::size_t d = spec.dim();
  if (static_cast<std::size_t>(rho0.rows()) != d || static_cast<std::size_t>(reduced.rows()) != d)
    throw std::invalid_argument("spectrum_direct: initial state does not match the accessible register");
  FourierSpectrum s;
  s.frequencies = frequency_set(spec);
  s.coeffs.assign(s.frequencies.size(), cplx(0.0));
  s.observable_id = std::move(observable_id);
  const RealVector mu = spec.generator_eigenvalues();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const auto idx = s.frequencies.index_of(mu(i) - mu(j));
      if (!idx) throw std::logic_error("spectrum_direct: eigenvalue difference missing from the frequency set");
      s.coeffs[*idx] += rho0(i, j) * reduced(j, i);
    }
  return s;
}

/// Exact Fourier coefficients of <O>_x for the pipeline (rho0, U(x), U_R, O).
inline FourierSpectrum spectrum_direct(const Matrix& rho0, const EncodingSpec& spec, const Matrix& u_r,
                                       const Matrix& obs, std::string observable_id = {}) {
  return spectrum_from_reduced(rho0, spec, reduced_observable(u_r, obs, spec.dim()), std::move(observable_id));
}

inline FourierSpectrum spectrum_direct(const Matrix& rho0, const EncodingSpec& spec, const Matrix& u_r,
                                       const PauliString& obs) {
  return spectrum_from_reduced(rho0, spec, reduced_observable(u_r, obs, spec.dim()), obs.str());
}

/// Fourier coefficients of a 2 pi-periodic readout with integer frequencies
/// up to omega_max, from N = 2 omega_max + 1 equispaced samples. Independent
/// of the pipeline; used as an oracle for spectrum_direct.
inline FourierSpectrum spectrum_dft(const std::function<double(double)>& readout, int omega_max) {
  if (omega_max < 0) throw std::invalid_argument("spectrum_dft: omega_max must be >= 0");
  const int n = 2 * omega_max + 1;
  std::vector<double> samples(n);
  for (int m = 0; m < n; ++m) samples[m] = readout(2 * std::numbers::pi * m / n);
  std::vector<double> freqs;
  for (int w = -omega_max; w <= omega_max; ++w) freqs.push_back(w);
  FourierSpectrum s;
  s.frequencies = FrequencySet(freqs);
  s.coeffs.assign(freqs.size(), cplx(0.0));
  for (int w = -omega_max; w <= omega_max; ++w) {
    cplx acc = 0.0;
    for (int m = 0; m < n; ++m) acc += samples[m] * std::exp(-kI * (2 * std::numbers::pi * w * m / n));
    s.coeffs[w + omega_max] = acc / static_cast<double>(n);
  }
  return s;
}

struct RichnessResult {
  double raw = 0.0;         // average count of non-zero frequencies per observable
  double normalized = 0.0;  // raw / |Omega|
  std::size_t omega_size = 0;
  std::size_t observables = 0;
};

/// Non-zero frequency count averaged over every Pauli string on the accessible
/// register (tensored with identity on the hidden one). A coefficient counts
/// as non-zero when |a_w| > rel_tol * max_w |a_w| for that observable.
inline RichnessResult richness(const EncodingSpec& spec, const Matrix& u_r, const Matrix& rho0, double rel_tol = 1e-10) {
  const std::size_t n_a = spec.num_qubits();
  if (n_a > 6) throw std::invalid_argument("richness: n_A > 6 exceeds the observable budget");
  const std::size_t d_a = spec.dim();
  const std::size_t d = static_cast<std::size_t>(u_r.rows());
  if (d % d_a != 0) throw std::invalid_argument("richness: reservoir dimension is not a multiple of 2^n_A");
  const std::size_t d_h = d / d_a;
  Matrix v(d, d_a);
  for (std::size_t i = 0; i < d_a; ++i) v.col(i) = u_r.col(i * d_h);
  const std::size_t count = std::size_t{1} << (2 * n_a);
  RichnessResult r;
  r.observables = count;
  double total = 0.0;
  for (std::size_t code = 0; code < count; ++code) {
    const PauliString p = PauliString::from_index(code, n_a);
    const Matrix reduced = v.adjoint() * p.apply_left_extended(v, d_h);
    const FourierSpectrum s = spectrum_from_reduced(rho0, spec, reduced);
    r.omega_size = s.size();
    total += static_cast<double>(s.nonzero_count(rel_tol));
  }
  r.raw = total / static_cast<double>(count);
  r.normalized = r.raw / static_cast<double>(r.omega_size);
  return r;
}

struct ExpressivityReport {
  Matrix matrix_a;  // |Omega| x M, A(w, k) = a_w^(k)
  std::size_t rank = 0;
  std::size_t num_observables = 0;
  std::size_t omega_size = 0;
  double locality_bound = 0.0;  // 4^{n_O}
  std::size_t bound = 0;        // min{M, |Omega|, 4^{n_O}}
  bool saturated = false;
};

inline ExpressivityReport expressivity_report(const std::vector<FourierSpectrum>& spectra, std::size_t n_measured,
                                              double rank_tol = kRankTolerance) {
  if (spectra.empty()) throw std::invalid_argument("expressivity_report: no spectra");
  const FrequencySet& omega = spectra.front().frequencies;
  for (const auto& s : spectra)
    if (!s.frequencies.same_as(omega) || s.coeffs.size() != omega.size())
      throw std::invalid_argument("expressivity_report: spectra do not share one frequency set");
  ExpressivityReport r;
  r.num_observables = spectra.size();
  r.omega_size = omega.size();
  r.matrix_a.resize(omega.size(), spectra.size());
  for (std::size_t k = 0; k < spectra.size(); ++k)
    for (std::size_t w = 0; w < omega.size(); ++w) r.matrix_a(w, k) = spectra[k].coeffs[w];
  r.rank = svd_rank(r.matrix_a, rank_tol);
  r.locality_bound = std::pow(4.0, static_cast<double>(n_measured));
  const double b = std::min({static_cast<double>(r.num_observables), static_cast<double>(r.omega_size), r.locality_bound});
  r.bound = static_cast<std::size_t>(b);
  r.saturated = (r.rank == r.bound);
  return r;
}

/// Spectrum of f = eta0 + sum_k eta_k <O_k>: b_w = sum_k eta_k a_w^(k) (+ eta0 at w = 0).
inline FourierSpectrum combine_spectra(const std::vector<FourierSpectrum>& spectra, const RealVector& eta,
                                       double eta0 = 0.0) {
  if (spectra.empty() || static_cast<std::size_t>(eta.size()) != spectra.size())
    throw std::invalid_argument("combine_spectra: one weight per spectrum required");
  FourierSpectrum out;
  out.frequencies = spectra.front().frequencies;
  out.coeffs.assign(out.frequencies.size(), cplx(0.0));
  out.observable_id = "prediction";
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    if (!spectra[k].frequencies.same_as(out.frequencies))
      throw std::invalid_argument("combine_spectra: spectra do not share one frequency set");
    for (std::size_t w = 0; w < out.coeffs.size(); ++w) out.coeffs[w] += eta(k) * spectra[k].coeffs[w];
  }
  if (auto z = out.frequencies.index_of(0.0)) out.coeffs[*z] += eta0;
  return out;
}

}  // namespace qelm
