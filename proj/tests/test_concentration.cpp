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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qelm/concentration.hpp"

using namespace qelm;

namespace {

Matrix pure(const Vector& v) { return v * v.adjoint(); }

Matrix zero_state(std::size_t d) {
  Matrix m = Matrix::Zero(d, d);
  m(0, 0) = 1;
  return m;
}

}  // namespace

TEST(Stats, Basics) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean_of(v), 2.5);
  EXPECT_DOUBLE_EQ(sample_variance(v), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(population_variance(v), 1.25);
  const auto f = fit_line({0, 1, 2}, {1, 3, 5});
  EXPECT_NEAR(f.slope, 2, 1e-14);
  EXPECT_NEAR(f.intercept, 1, 1e-14);
  Rng rng(1);
  std::vector<double> big;
  for (int i = 0; i < 400; ++i) big.push_back(rng.normal());
  // Bootstrap error of the mean tracks sigma / sqrt(n).
  EXPECT_NEAR(bootstrap_stderr(big, mean_of, rng, 400), standard_error(big), 0.3 * standard_error(big));
}

TEST(Twirl, PureStateClosedForm) {
  // Pure rho: a = b = 1 / (d (d + 1)).
  for (std::size_t d : {2u, 4u, 8u}) {
    const auto [a, b] = haar_twirl_coefficients(1.0, d);
    EXPECT_NEAR(a, 1.0 / (d * (d + 1.0)), 1e-15);
    EXPECT_NEAR(b, 1.0 / (d * (d + 1.0)), 1e-15);
  }
  const auto [a, b] = haar_twirl_coefficients(0.5, 2);  // maximally mixed qubit: I / 4
  EXPECT_NEAR(a, 0.25, 1e-15);
  EXPECT_NEAR(b, 0.0, 1e-15);
}

TEST(Twirl, MatchesMonteCarloAverage) {
  Rng rng(2);
  const Matrix rho = pure(haar_state(2, rng));
  Matrix avg = Matrix::Zero(4, 4);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Matrix u = haar_unitary(2, rng);
    const Matrix s = u * rho * u.adjoint();
    avg += kron(s, s);
  }
  avg /= n;
  EXPECT_LT(max_abs(avg - haar_second_moment(rho)), 0.01);
}

TEST(Expressibility, HaarSamplerNearZero) {
  Rng rng(3);
  const auto r = expressibility_measure([](Rng& g) { return haar_unitary(2, g); }, zero_state(2), 10000, rng, 20);
  EXPECT_LE(r.epsilon, 0.02);
  EXPECT_GT(r.stderr_, 0.0);
}

TEST(Expressibility, IdentitySamplerConstant) {
  // || (I + SWAP)/6 - |00><00| ||_1 at d = 2: eigenvalues 1/3 - 1 = -2/3, 1/3, 1/3, 0.
  Rng rng(4);
  const auto r = expressibility_measure([](Rng&) { return Matrix(Matrix::Identity(2, 2)); }, zero_state(2), 5, rng);
  EXPECT_NEAR(r.epsilon, 4.0 / 3.0, 1e-12);
}

TEST(Expressibility, DeeperLayersNotWorse) {
  auto median_eps = [](std::size_t layers) {
    std::vector<double> e;
    for (std::uint64_t s = 0; s < 5; ++s) {
      Rng rng(100 + s);
      const auto enc = EncodingSpec::layered(2, layers, 500 + s);
      e.push_back(expressibility_measure(
                      [&](Rng& g) { return encode(enc, g.uniform(-std::numbers::pi, std::numbers::pi)); }, zero_state(4),
                      400, rng)
                      .epsilon);
    }
    std::sort(e.begin(), e.end());
    return e[2];
  };
  const double e1 = median_eps(1), e4 = median_eps(4), e16 = median_eps(16);
  EXPECT_GE(e1 + 0.05, e4);
  EXPECT_GE(e4 + 0.05, e16);
}

TEST(EncodingBound, HoldsAcrossRandomConfigs) {
  Rng master(5);
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = master.derive(trial);
    const std::size_t n_a = 1 + rng.below(3), n_h = rng.below(2), layers = 1 + rng.below(4);
    const auto enc = EncodingSpec::layered(n_a, layers, rng.engine()());
    const Matrix u_r = haar_unitary(std::size_t{1} << (n_a + n_h), rng);
    const auto obs = random_paulis(n_a + n_h, 1, rng)[0];
    std::vector<double> xs;
    for (int i = 0; i < 60; ++i) xs.push_back(rng.uniform(-std::numbers::pi, std::numbers::pi));
    const auto rep = encoding_bound(enc, u_r, obs.matrix(), zero_state(enc.dim()), xs);
    EXPECT_TRUE(rep.satisfied) << "trial " << trial << " lhs " << rep.lhs << " rhs " << rep.rhs;
  }
}

TEST(EncodingBound, IdentityObservableIsZero) {
  const auto enc = EncodingSpec::layered(2, 2, 9);
  const auto rep = encoding_bound(enc, Matrix::Identity(8, 8), Matrix::Identity(8, 8), zero_state(4), {0.1, 0.5, 2.0});
  EXPECT_NEAR(rep.lhs, 0.0, 1e-14);
  EXPECT_TRUE(rep.satisfied);
}

TEST(EncodingBound, TwoDesignFirstTerm) {
  // Haar-random "encodings" with U_R = I and a Pauli O: first term 1 / (2^n + 1).
  Rng rng(6);
  std::vector<Matrix> states;
  for (int i = 0; i < 50; ++i) {
    const Matrix u = haar_unitary(4, rng);
    states.push_back(u * zero_state(4) * u.adjoint());
  }
  const auto rep = ensemble_variance_bound(states, zero_state(4), PauliString::parse("ZX").matrix());
  EXPECT_NEAR(rep.first_term, 1.0 / 5.0, 1e-14);
  EXPECT_TRUE(rep.satisfied);
}

TEST(VarOverInputs, ShallowIsUnconcentratedAndIdentityIsZero) {
  SweepConfig cfg;
  cfg.n_accessible = {2};
  cfg.depths = {1};
  cfg.n_samples = 400;
  auto rows = var_over_inputs(cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GT(rows[0].value, 0.02);
  EXPECT_LT(rows[0].value, 1.0);
  cfg.observable = "II";
  rows = var_over_inputs(cfg);
  EXPECT_EQ(rows[0].value, 0.0);
}

TEST(VarOverInputs, Deterministic) {
  SweepConfig cfg;
  cfg.n_accessible = {2, 3};
  cfg.depths = {1, 3};
  cfg.n_samples = 100;
  const auto a = var_over_inputs(cfg), b = var_over_inputs(cfg);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value);
}

TEST(VarOverInputs, DeepSlopeNearMinusOne) {
  SweepConfig cfg;
  cfg.n_accessible = {2, 3, 4, 5, 6};
  cfg.depths = {50};
  cfg.n_samples = 400;
  const auto rows = var_over_inputs(cfg);
  std::vector<double> n, lv;
  for (const auto& r : rows) {
    n.push_back(r.n_accessible);
    lv.push_back(std::log2(r.value));
  }
  const double slope = fit_line(n, lv).slope;
  EXPECT_GE(slope, -1.3);
  EXPECT_LE(slope, -0.7);
}

TEST(SweepConfig, Validation) {
  SweepConfig cfg;
  cfg.n_samples = 50;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.n_samples = 100;
  cfg.n_accessible = {};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(VarOverReservoirs, HaarMatchesTwoDesign) {
  for (std::size_t n : {2u, 4u, 6u}) {
    SweepConfig cfg;
    cfg.quantity = SweepQuantity::VarOverReservoirs;
    cfg.n_accessible = {n};
    cfg.reservoir = ReservoirSpec::haar(0);
    cfg.encoding = EncodingScheme::PauliReupload;
    cfg.observable = "Z";
    cfg.n_samples = 2000;
    const auto rows = var_over_reservoirs(cfg);
    ASSERT_EQ(rows.size(), 1u);
    const double expect = 1.0 / ((1 << n) + 1.0);
    EXPECT_NEAR(rows[0].bound, expect, 1e-14);
    EXPECT_NEAR(rows[0].value, expect, 0.3 * expect);
    EXPECT_TRUE(rows[0].satisfied);
  }
}

TEST(VarOverReservoirs, IdentityEnsembleIsZero) {
  SweepConfig cfg;
  cfg.quantity = SweepQuantity::VarOverReservoirs;
  cfg.n_accessible = {3};
  cfg.encoding = EncodingScheme::PauliReupload;
  cfg.n_samples = 100;
  EXPECT_EQ(var_over_reservoirs(cfg)[0].value, 0.0);
}

TEST(ReservoirBound, HoldsForIsingAndHaarEnsembles) {
  Rng rng(7);
  const auto enc = EncodingSpec::exponential(2);
  const Matrix rho_x = encoded_state(enc, 0.7, DensityMatrix::plus_state(2).matrix());
  const Matrix sigma = kron(rho_x, zero_state(2));
  std::vector<Matrix> haar, ising;
  for (int i = 0; i < 40; ++i) {
    haar.push_back(haar_unitary(8, rng));
    ising.push_back(realize(ReservoirSpec::ising(rng.uniform(-1, 1), rng.uniform(0, 1), 1.0, 10.0), 3));
  }
  const Matrix obs = PauliString::parse("ZZI").matrix();
  EXPECT_TRUE(reservoir_bound(haar, sigma, obs).satisfied);
  EXPECT_TRUE(reservoir_bound(ising, sigma, obs).satisfied);
}

TEST(Entanglement, Examples) {
  const Matrix mixed = Matrix::Identity(8, 8) / 8.0;
  const auto r0 = entanglement_bound_check(mixed, PauliString::parse("ZII"));
  EXPECT_NEAR(r0.lhs, 0.0, 1e-14);
  EXPECT_NEAR(r0.rhs, 0.0, 1e-7);
  EXPECT_TRUE(r0.satisfied);
  const auto r1 = entanglement_bound_check(zero_state(8), PauliString::parse("ZII"));
  EXPECT_NEAR(r1.lhs, 1.0, 1e-14);
  EXPECT_NEAR(r1.entropy, 1.0, 1e-12);
  EXPECT_NEAR(r1.rhs, std::sqrt(2 * std::numbers::ln2), 1e-12);
  EXPECT_NEAR(r1.rhs, 1.177, 1e-3);
  EXPECT_TRUE(r1.satisfied);
}

TEST(Entanglement, RandomStatesSatisfyAndDecay) {
  Rng rng(8);
  std::vector<double> n_vals, lhs_log;
  for (std::size_t n = 4; n <= 10; n += 2) {
    double acc = 0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      const Vector psi = haar_state(std::size_t{1} << n, rng);
      std::string s(n, 'I');
      s[0] = 'Z';
      s[1] = 'X';
      const auto rep = entanglement_bound_check(pure(psi), PauliString::parse(s));
      EXPECT_TRUE(rep.satisfied);
      acc += rep.lhs;
    }
    n_vals.push_back(n);
    lhs_log.push_back(std::log2(acc / reps));
  }
  const double slope = fit_line(n_vals, lhs_log).slope;
  EXPECT_LT(slope, -0.35);
  EXPECT_GT(slope, -0.65);
}

TEST(Entanglement, SubsetChecks) {
  EXPECT_THROW(entanglement_bound_check(zero_state(4), PauliString::parse("Z").matrix(), {2}), std::invalid_argument);
  EXPECT_THROW(entanglement_bound_check(zero_state(4), PauliString::parse("Z").matrix(), {0, 1}), std::invalid_argument);
}

TEST(Global, HaarSecondMoment) {
  Rng rng(9);
  const auto r = global_measurement_experiment(3, 0, 0, GlobalEncoding::Haar, 5000, rng);
  EXPECT_NEAR(r.second_moment, r.predicted_haar, 0.2 * r.predicted_haar);
  EXPECT_NEAR(r.predicted_haar, std::pow(1.0 / 3.0, 3), 1e-15);
  EXPECT_TRUE(r.bound.satisfied);
}

TEST(Global, LayeredExactMatchesMonteCarloAndBound) {
  Rng master(10);
  for (int t = 0; t < 20; ++t) {
    Rng rng = master.derive(t);
    const auto r = global_measurement_experiment(1 + t % 4, t % 2, 1 + t % 3, GlobalEncoding::Layered, 4000, rng, t % 4 != 0);
    EXPECT_TRUE(r.bound.satisfied) << t;
    EXPECT_NEAR(r.second_moment, r.exact_second_moment, 5 * r.second_moment_stderr + 1e-12) << t;
  }
}

TEST(Global, ExponentialAtEveryDepth) {
  // Typical log-variance decays at least like e^{-0.8 n_A} for shallow and deep encodings.
  for (std::size_t depth : {1u, 8u}) {
    std::vector<double> n, lv;
    for (std::size_t n_a = 1; n_a <= 6; ++n_a) {
      std::vector<double> v;
      for (std::uint64_t s = 0; s < 21; ++s) {
        Rng rng(1000 * depth + 37 * n_a + s);
        v.push_back(std::log(global_measurement_experiment(n_a, 1, depth, GlobalEncoding::Layered, 100, rng).exact_variance));
      }
      std::sort(v.begin(), v.end());
      n.push_back(n_a);
      lv.push_back(v[10]);
    }
    EXPECT_LT(fit_line(n, lv).slope, -0.8) << depth;
  }
}

TEST(Noise, BoundAndMonotoneDecay) {
  NoiseConfig cfg;
  cfg.n_accessible = 4;
  cfg.n_hidden = 1;
  cfg.max_layers = 10;
  cfg.noise_p = {0.0, 0.1, 0.3};
  cfg.n_inputs = 10;
  const auto r = noise_concentration_experiment(cfg);
  ASSERT_EQ(r.points.size(), 30u);
  for (const auto& pt : r.points) {
    if (pt.p == 0.0) {
      EXPECT_FALSE(pt.bound.satisfied);
      continue;
    }
    EXPECT_TRUE(pt.bound.satisfied) << pt.p << " " << pt.layers;
    const double q = 1 - pt.p, b = 1 / (2 * std::numbers::ln2);
    EXPECT_NEAR(pt.bound.rhs,
                r.obs_norm * std::sqrt(2 * std::numbers::ln2 * std::pow(q, (pt.layers + 1.0) / (2 * std::numbers::ln2)) * 4),
                1e-12);
    (void)b;
  }
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    if (r.points[i].p != r.points[i - 1].p) continue;
    if (r.points[i].p > 0) {
      EXPECT_LE(r.points[i].state_distance, r.points[i - 1].state_distance + 1e-12);
    } else {
      EXPECT_NEAR(r.points[i].state_distance, r.points[i - 1].state_distance, 1e-12);
    }
  }
  for (std::size_t k = 1; k < 3; ++k) EXPECT_LT(r.points[10 * k + 9].median_distance, r.points[10 * k].median_distance);
  ASSERT_EQ(r.slopes.size(), 3u);
  EXPECT_GT(r.slopes[0], r.slopes[1]);
  EXPECT_GT(r.slopes[1], r.slopes[2]);
}

TEST(Noise, DepolarizedDistanceClosedForm) {
  // Single qubit, no hidden, one layer: the Bloch vector shrinks by q per channel.
  NoiseConfig cfg;
  cfg.n_accessible = 1;
  cfg.n_hidden = 0;
  cfg.max_layers = 3;
  cfg.noise_p = {0.0, 0.2};
  cfg.n_inputs = 5;
  cfg.reservoir = ReservoirSpec::identity();
  const auto r = noise_concentration_experiment(cfg);
  for (std::size_t l = 0; l < 3; ++l)
    EXPECT_NEAR(r.points[3 + l].mean_distance, r.points[l].mean_distance * std::pow(0.8, l + 2.0), 1e-12);
}

TEST(HaarStats, CoefficientMoments) {
  Rng rng(11);
  const auto s = haar_coefficient_stats(2, 2, PauliString::parse("ZIXI"), 5000, rng);
  ASSERT_EQ(s.d, 16u);
  for (std::size_t k = 0; k < s.mean_re.size(); ++k) {
    EXPECT_LE(std::abs(s.mean_re[k]), 4 * s.mean_re_se[k] + 1e-15);
    EXPECT_LE(std::abs(s.mean_im[k]), 4 * s.mean_im_se[k] + 1e-15);
  }
  const double a2 = 1.0 / 16;
  EXPECT_NEAR(s.var_offdiag_expected, a2 * 16.0 / 255.0, 1e-15);
  EXPECT_NEAR(s.var_offdiag, s.var_offdiag_expected, 0.1 * s.var_offdiag_expected);
  EXPECT_NEAR(s.var_diag_expected, a2 / 17.0, 1e-15);
  EXPECT_NEAR(s.var_diag, s.var_diag_expected, 0.1 * s.var_diag_expected);
  EXPECT_NEAR(s.cov_diag_expected, -a2 / 255.0, 1e-15);
  EXPECT_NEAR(s.cov_diag, s.cov_diag_expected, 4 * s.cov_diag_se);
  ASSERT_TRUE(s.has_distinct);
  EXPECT_LE(std::abs(s.cov_distinct_re), 4 * s.cov_distinct_se_re + 1e-15);
  EXPECT_LE(std::abs(s.cov_distinct_im), 4 * s.cov_distinct_se_im + 1e-15);
}

TEST(Hypothesis, SingleSampleClosedForm) {
  EXPECT_NEAR(hypothesis_success_exact(0.6, 1), 0.55, 1e-12);
  EXPECT_NEAR(hypothesis_success_exact(0.5, 7), 0.5, 1e-12);
  Rng rng(12);
  EXPECT_NEAR(hypothesis_test_sim(0.6, 1, 10000, rng), 0.55, 0.015);
  EXPECT_NEAR(hypothesis_test_sim(0.5, 3, 10000, rng), 0.5, 0.015);
}

TEST(Hypothesis, ExactMatchesTotalVariation) {
  // Oracle: 1/2 + TV(P^N, Q^N)/2 computed from the binomial pmfs.
  for (double p : {0.55, 0.7, 0.9})
    for (std::size_t n : {1u, 2u, 5u, 11u}) {
      double tv = 0;
      for (std::size_t k = 0; k <= n; ++k) {
        const double c = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
        tv += std::abs(c * std::pow(p, k) * std::pow(1 - p, n - k) - c * std::pow(0.5, n));
      }
      EXPECT_NEAR(hypothesis_success_exact(p, n), 0.5 + tv / 4, 1e-12) << p << " " << n;
    }
}

TEST(Hypothesis, ShrinksWithQubits) {
  double prev = 1.0;
  for (std::size_t n = 4; n <= 10; n += 2) {
    const double adv = hypothesis_success_exact(0.5 + std::ldexp(1.0, -static_cast<int>(n)), n * n) - 0.5;
    EXPECT_LT(adv, prev);
    prev = adv;
  }
  EXPECT_LT(prev, 0.02);
}
