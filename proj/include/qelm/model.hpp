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
 * End-to-end QELM: readouts, linear training with intercept, R^2 scoring
 * and classical Fourier surrogates.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qelm/encoding.hpp"
#include "qelm/fourier.hpp"
#include "qelm/linalg.hpp"
#include "qelm/pauli.hpp"
#include "qelm/reservoir.hpp"
#include "qelm/rng.hpp"
#include "qelm/state.hpp"

namespace qelm {

/// Default ridge strength; only a numerical stabilizer.
inline constexpr double kDefaultRidge = 1e-10;

struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  std::uint64_t seed = 0;
  int cutoff = 0;

  std::size_t size() const { return x.size(); }
};

/// Real trigonometric polynomial sum_{k=1}^K a_k cos(kx) + b_k sin(kx).
struct FourierTarget {
  std::vector<double> a, b;

  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double w = static_cast<double>(k + 1);
      acc += a[k] * std::cos(w * x) + b[k] * std::sin(w * x);
    }
    return acc;
  }

  int cutoff() const { return static_cast<int>(a.size()); }
};

/// Random target with a_k, b_k ~ U[-1, 1] (a_k drawn before b_k for each k).
inline FourierTarget random_fourier_target(int cutoff, Rng& rng) {
  if (cutoff < 1) throw std::invalid_argument("random_fourier_target: cutoff must be >= 1");
  FourierTarget t;
  for (int k = 0; k < cutoff; ++k) {
    t.a.push_back(rng.uniform(-1.0, 1.0));
    t.b.push_back(rng.uniform(-1.0, 1.0));
  }
  return t;
}

/// n points equidistant on [lo, hi] (both ends included).
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

template <class F>
Dataset tabulate(const F& f, std::vector<double> xs) {
  Dataset d;
  d.x = std::move(xs);
  d.y.reserve(d.x.size());
  for (double x : d.x) {
    if (!std::isfinite(x)) throw std::invalid_argument("tabulate: non-finite input");
    d.y.push_back(f(x));
  }
  return d;
}

class QelmModel {
 public:
  QelmModel(EncodingSpec encoding, ReservoirSpec reservoir, std::size_t n_hidden, Matrix rho0,
            std::vector<PauliString> observables, std::optional<std::uint64_t> shots = std::nullopt)
      : encoding_(std::move(encoding)),
        reservoir_(reservoir),
        n_hidden_(n_hidden),
        rho0_(std::move(rho0)),
        observables_(std::move(observables)),
        shots_(shots) {
    const std::size_t n = encoding_.num_qubits() + n_hidden_;
    if (n > 12) throw std::invalid_argument("QelmModel: n_A + n_H must be <= 12");
    if (static_cast<std::size_t>(rho0_.rows()) != encoding_.dim() || rho0_.cols() != rho0_.rows())
      throw std::invalid_argument("QelmModel: initial state does not match the accessible register");
    if (observables_.empty()) throw std::invalid_argument("QelmModel: need at least one observable");
    for (const auto& o : observables_)
      if (o.num_qubits() != n) throw std::invalid_argument("QelmModel: observable " + o.str() + " has the wrong length");
    if (shots_ && *shots_ == 0) throw std::invalid_argument("QelmModel: shots must be positive");
    u_r_ = realize(reservoir_, n);
    const std::size_t d_a = encoding_.dim(), d_h = std::size_t{1} << n_hidden_;
    Matrix v(u_r_.rows(), d_a);
    for (std::size_t i = 0; i < d_a; ++i) v.col(i) = u_r_.col(i * d_h);
    reduced_.reserve(observables_.size());
    // Stored transposed so that Tr[M rho] = sum(M^T o rho).
    for (const auto& o : observables_) reduced_.push_back((v.adjoint() * o.apply_left(v)).transpose());
    eta_ = RealVector::Zero(observables_.size());
  }

  const EncodingSpec& encoding() const { return encoding_; }
  const ReservoirSpec& reservoir() const { return reservoir_; }
  std::size_t n_hidden() const { return n_hidden_; }
  const Matrix& rho0() const { return rho0_; }
  const Matrix& reservoir_unitary() const { return u_r_; }
  const std::vector<PauliString>& observables() const { return observables_; }
  std::optional<std::uint64_t> shots() const { return shots_; }
  std::size_t num_observables() const { return observables_.size(); }

  const RealVector& eta() const { return eta_; }
  double eta0() const { return eta0_; }

  void set_weights(RealVector eta, double eta0) {
    if (static_cast<std::size_t>(eta.size()) != observables_.size())
      throw std::invalid_argument("QelmModel::set_weights: one weight per observable required");
    eta_ = std::move(eta);
    eta0_ = eta0;
  }

  /// <O_k>_x for every observable; shot-sampled when the model has a shot budget.
  RealVector readout_vector(double x, Rng* rng = nullptr) const {
    const Matrix rho = encoded_state(encoding_, x, rho0_);
    RealVector out(observables_.size());
    for (std::size_t k = 0; k < observables_.size(); ++k) out(k) = reduced_[k].cwiseProduct(rho).sum().real();
    if (shots_) {
      if (!rng) throw std::invalid_argument("QelmModel::readout_vector: a random stream is required with shots");
      for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = sample_shots(out(k), *shots_, *rng);
    }
    return out;
  }

  /// N x M design matrix of readouts.
  RealMatrix readout_matrix(const std::vector<double>& xs, Rng* rng = nullptr) const {
    RealMatrix phi(xs.size(), observables_.size());
    for (std::size_t i = 0; i < xs.size(); ++i) phi.row(i) = readout_vector(xs[i], rng).transpose();
    return phi;
  }

  double predict(double x, Rng* rng = nullptr) const { return eta_.dot(readout_vector(x, rng)) + eta0_; }

  std::vector<double> predict(const std::vector<double>& xs, Rng* rng = nullptr) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(predict(x, rng));
    return out;
  }

  /// Exact spectrum of each readout (diagonal encodings only).
  std::vector<FourierSpectrum> spectra() const {
    std::vector<FourierSpectrum> out;
    for (std::size_t k = 0; k < observables_.size(); ++k)
      out.push_back(spectrum_from_reduced(rho0_, encoding_, reduced_[k].transpose(), observables_[k].str()));
    return out;
  }

  /// b_w = sum_k eta_k a_w^(k), plus eta0 at w = 0.
  FourierSpectrum prediction_spectrum() const { return combine_spectra(spectra(), eta_, eta0_); }

 private:
  EncodingSpec encoding_;
  ReservoirSpec reservoir_;
  std::size_t n_hidden_;
  Matrix rho0_;
  std::vector<PauliString> observables_;
  std::optional<std::uint64_t> shots_;
  Matrix u_r_;
  std::vector<Matrix> reduced_;
  RealVector eta_;
  double eta0_ = 0.0;
};

struct LinearFit {
  RealVector coef;
  double intercept = 0.0;
  double train_rmse = 0.0;
};

/// argmin ||Phi c + c0 - y||^2 + lambda ||c||^2 with an unpenalized intercept.
/// Solved by SVD of the centered design; at lambda = 0 singular values below
/// kRankTolerance * s_max are dropped, which gives the minimum-norm solution.
inline LinearFit ridge_fit(const RealMatrix& phi, const std::vector<double>& y, double lambda = kDefaultRidge) {
  if (phi.rows() == 0) throw std::invalid_argument("ridge_fit: need at least one sample");
  if (static_cast<std::size_t>(phi.rows()) != y.size()) throw std::invalid_argument("ridge_fit: design and targets differ in length");
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
  const Eigen::Map<const RealVector> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const RealVector mean_phi = phi.colwise().mean().transpose();
  const double mean_y = yv.mean();
  const RealMatrix centered = phi.rowwise() - mean_phi.transpose();
  const RealVector yc = yv.array() - mean_y;

  LinearFit fit;
  fit.coef = RealVector::Zero(phi.cols());
  if (phi.cols() > 0) {
    Eigen::BDCSVD<RealMatrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector s = svd.singularValues();
    const double cut = s.size() ? kRankTolerance * s(0) : 0.0;
    const RealVector uty = svd.matrixU().transpose() * yc;
    RealVector scaled = RealVector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > cut && s(i) > 0.0) scaled(i) = s(i) / (s(i) * s(i) + lambda) * uty(i);
    fit.coef = svd.matrixV() * scaled;
  }
  fit.intercept = mean_y - mean_phi.dot(fit.coef);
  const RealVector resid = (phi * fit.coef).array() + fit.intercept - yv.array();
  fit.train_rmse = std::sqrt(resid.squaredNorm() / static_cast<double>(y.size()));
  return fit;
}

/// Fit the model weights on a dataset; the model is updated in place.
inline LinearFit train(QelmModel& model, const Dataset& data, double lambda = kDefaultRidge, Rng* rng = nullptr) {
  const LinearFit fit = ridge_fit(model.readout_matrix(data.x, rng), data.y, lambda);
  model.set_weights(fit.coef, fit.intercept);
  return fit;
}

inline double r2_score(const std::vector<double>& predictions, const std::vector<double>& targets) {
  if (predictions.size() != targets.size()) throw std::invalid_argument("r2_score: lengths differ");
  if (targets.size() < 2) throw std::invalid_argument("r2_score: need at least two targets");
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= static_cast<double>(targets.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ss_res += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  if (ss_tot == 0.0) throw std::domain_error("r2_score: targets are constant, R^2 is undefined");
  return 1.0 - ss_res / ss_tot;
}

inline double rmse(const std::vector<double>& predictions, const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || targets.empty()) throw std::invalid_argument("rmse: lengths differ or empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) acc += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
  return std::sqrt(acc / static_cast<double>(targets.size()));
}

/// Classical model c0 + sum_w c_w cos(wx) + s_w sin(wx) over positive frequencies.
class FourierSurrogate {
 public:
  FourierSurrogate() = default;
  FourierSurrogate(std::vector<double> positive_freqs, LinearFit fit)
      : freqs_(std::move(positive_freqs)), fit_(std::move(fit)) {}

  const std::vector<double>& frequencies() const { return freqs_; }
  const LinearFit& fit() const { return fit_; }

  static RealVector features(const std::vector<double>& freqs, double x) {
    RealVector f(2 * freqs.size());
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      f(2 * k) = std::cos(freqs[k] * x);
      f(2 * k + 1) = std::sin(freqs[k] * x);
    }
    return f;
  }

  double predict(double x) const { return fit_.coef.dot(features(freqs_, x)) + fit_.intercept; }

  std::vector<double> predict(const std::vector<double>& xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(predict(x));
    return out;
  }

 private:
  std::vector<double> freqs_;
  LinearFit fit_;
};

inline FourierSurrogate fit_fourier_features(std::vector<double> positive_freqs, const Dataset& data,
                                             double lambda = kDefaultRidge) {
  if (data.size() == 0) throw std::invalid_argument("fit_fourier_features: empty dataset");
  RealMatrix phi(data.size(), 2 * positive_freqs.size());
  for (std::size_t i = 0; i < data.size(); ++i) phi.row(i) = FourierSurrogate::features(positive_freqs, data.x[i]).transpose();
  return FourierSurrogate(std::move(positive_freqs), ridge_fit(phi, data.y, lambda));
}

/// Surrogate over every frequency of the set; w = 0 is the intercept.
inline FourierSurrogate full_fourier_surrogate(const FrequencySet& omega, const Dataset& data,
                                               double lambda = kDefaultRidge) {
  std::vector<double> pos;
  for (double w : omega.values())
    if (w > kFrequencyTolerance) pos.push_back(w);
  return fit_fourier_features(std::move(pos), data, lambda);
}

struct RffResult {
  FourierSurrogate surrogate;
  std::vector<double> sampled;  // k draws, with repetition, as |w|
  double train_rmse = 0.0;
};

/// Random Fourier features: draw k frequencies with probability proportional to
/// `weights` (w -> nonnegative weight), then fit on the distinct |w| drawn.
/// w and -w are the same real feature pair; w = 0 is always covered by the intercept.
inline RffResult rff_surrogate(const std::vector<std::pair<double, double>>& weights, std::size_t k, const Dataset& data,
                               Rng& rng, double lambda = kDefaultRidge) {
  if (k == 0) throw std::invalid_argument("rff_surrogate: k must be >= 1");
  double total = 0.0;
  for (const auto& [w, p] : weights) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("rff_surrogate: weights must be nonnegative");
    total += p;
  }
  if (total <= 0.0) throw std::invalid_argument("rff_surrogate: all weights are zero");
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& [w, p] : weights) cdf.push_back(acc += p / total);
  RffResult r;
  std::vector<double> distinct;
  for (std::size_t i = 0; i < k; ++i) {
    const double u = rng.uniform();
    std::size_t idx = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    idx = std::min(idx, weights.size() - 1);
    const double w = std::abs(weights[idx].first);
    r.sampled.push_back(w);
    if (w > kFrequencyTolerance) distinct.push_back(w);
  }
  const FrequencySet set(distinct);
  r.surrogate = fit_fourier_features(set.values(), data, lambda);
  r.train_rmse = r.surrogate.fit().train_rmse;
  return r;
}

/// Sampling weights |a_w| from a spectrum.
inline std::vector<std::pair<double, double>> spectrum_weights(const FourierSpectrum& s) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < s.size(); ++k) out.emplace_back(s.frequencies[k], std::abs(s.coeffs[k]));
  return out;
}

}  // namespace qelm
