// Copyright 2026 The ipmcmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ipmcmc/errors.hpp"
#include "ipmcmc/models/discrete_hmm.hpp"
#include "ipmcmc/models/lgssm.hpp"
#include "ipmcmc/models/nlssm.hpp"
#include "ipmcmc/smc.hpp"
#include "oracles.hpp"

namespace ipmcmc::models {
namespace {

TEST(BenchmarkLgssm, TransitionIsScaledRotation) {
  const auto a = benchmark_lgssm_transition();
  EXPECT_LT((a.transpose() * a - 0.99 * 0.99 * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(a.determinant(), std::pow(0.99, 3), 1e-12);
}

TEST(BenchmarkLgssm, FixedMomentsAndDirichletEmission) {
  const auto p = benchmark_lgssm_params(4);
  EXPECT_EQ(p.initial_mean, Eigen::VectorXd(Eigen::Vector3d(0.0, 1.0, 1.0)));
  EXPECT_EQ(p.initial_cov, Eigen::MatrixXd(0.1 * Eigen::MatrixXd::Identity(3, 3)));
  EXPECT_EQ(p.transition_cov, Eigen::MatrixXd(Eigen::MatrixXd::Identity(3, 3)));
  EXPECT_EQ(p.emission_cov, Eigen::MatrixXd(0.1 * Eigen::MatrixXd::Identity(20, 20)));
  ASSERT_EQ(p.emission.rows(), 20);
  ASSERT_EQ(p.emission.cols(), 3);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(p.emission.col(c).sum(), 1.0, 1e-12);
    EXPECT_GE(p.emission.col(c).minCoeff(), 0.0);
  }
  EXPECT_NE(benchmark_lgssm_params(5).emission, p.emission);
}

TEST(BenchmarkLgssm, NoiseFreeLimitFollowsTransition) {
  auto p = benchmark_lgssm_params(1);
  p.initial_cov = 1e-300 * Eigen::MatrixXd::Identity(3, 3);
  p.transition_cov = 1e-300 * Eigen::MatrixXd::Identity(3, 3);
  RandomStream rng(2);
  const auto sample = lgssm_simulate(p, 10, rng);
  Eigen::Vector3d x = p.initial_mean;
  for (std::size_t t = 0; t < 10; ++t) {
    for (int d = 0; d < 3; ++d) {
      EXPECT_NEAR(sample.latents.at(t)[static_cast<std::size_t>(d)], x(d), 1e-12);
    }
    x = p.transition * x;
  }
}

TEST(BenchmarkLgssm, InitialAndProcessNoiseMoments) {
  const auto p = benchmark_lgssm_params(1);
  const LinearGaussianModel model(p);
  RandomStream rng(3);
  const std::size_t n = 100000;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  std::vector<double> x(3);
  const Trajectory origin(1, 3, {0.0, 0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    model.sample_initial(rng, x);
    mean += Eigen::Vector3d(x[0], x[1], x[2]);
    model.sample_transition(1, PathView(origin, 1), rng, x);
    const Eigen::Vector3d delta(x[0], x[1], x[2]);
    cov += delta * delta.transpose();
  }
  mean /= static_cast<double>(n);
  cov /= static_cast<double>(n);
  for (int d = 0; d < 3; ++d) {
    EXPECT_NEAR(mean(d), p.initial_mean(d), 4.0 * std::sqrt(0.1 / n));
    for (int e = 0; e < 3; ++e) {
      const double omega = p.transition_cov(d, e);
      const double se = std::sqrt((p.transition_cov(d, d) * p.transition_cov(e, e) + omega * omega) / n);
      EXPECT_NEAR(cov(d, e), omega, 4.0 * se);
    }
  }
}

TEST(KalmanFilter, SingleStepEvidenceIsGaussianMarginal) {
  const auto p = benchmark_lgssm_params(6);
  RandomStream rng(7);
  const auto obs = lgssm_simulate(p, 1, rng).observations;
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(obs.values().data(), 20);
  const Eigen::VectorXd mean = p.emission * p.initial_mean;
  const Eigen::MatrixXd cov = p.emission * p.initial_cov * p.emission.transpose() + p.emission_cov;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(y - mean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double expected = -0.5 * (z.squaredNorm() + logdet + 20.0 * std::log(2.0 * std::numbers::pi));
  EXPECT_NEAR(kalman_filter(p, obs).log_evidence, expected, 1e-10);
}

TEST(KalmanFilter, MatchesGridQuadrature) {
  const testing::ScalarProblem problem(8);
  const auto kalman = kalman_filter(problem.params, problem.observations);
  const auto smoothed = rts_smoother(problem.params, kalman);
  const auto grid = testing::grid_posterior({}, problem.observations.values(), -20.0, 20.0, 2001);
  EXPECT_NEAR(kalman.log_evidence, grid.log_evidence, 1e-6);
  for (std::size_t t = 0; t < 8; ++t) {
    EXPECT_NEAR(kalman.filtered_means[t](0), grid.filtered_means[t], 1e-6);
    EXPECT_NEAR(kalman.filtered_covs[t](0, 0), grid.filtered_vars[t], 1e-6);
    EXPECT_NEAR(smoothed.means[t](0), grid.smoothed_means[t], 1e-6);
    EXPECT_NEAR(smoothed.covs[t](0, 0), grid.smoothed_vars[t], 1e-6);
  }
}

TEST(KalmanFilter, AgreesWithLargeSmcEstimate) {
  const testing::ScalarProblem problem(20);
  const double exact = kalman_filter(problem.params, problem.observations).log_evidence;
  std::vector<double> estimates;
  for (std::uint64_t k = 0; k < 8; ++k) {
    RandomStream rng = RandomStream(8).derive("rep", k);
    estimates.push_back(smc_sweep(problem.model, problem.observations, 100000, rng).log_evidence());
  }
  double mean = 0.0;
  for (const double e : estimates) {
    mean += e / 8.0;
  }
  double var = 0.0;
  for (const double e : estimates) {
    var += (e - mean) * (e - mean) / 7.0;
  }
  EXPECT_NEAR(mean, exact, 3.0 * std::sqrt(var / 8.0) + 1e-9);
}

TEST(RtsSmoother, LastStepEqualsFilter) {
  const auto p = benchmark_lgssm_params(9);
  RandomStream rng(10);
  const auto obs = lgssm_simulate(p, 12, rng).observations;
  const auto kalman = kalman_filter(p, obs);
  const auto smoothed = rts_smoother(p, kalman);
  EXPECT_EQ(smoothed.means.back(), kalman.filtered_means.back());
  EXPECT_EQ(smoothed.covs.back(), kalman.filtered_covs.back());
}

TEST(RtsSmoother, SingleStepIsConjugateUpdate) {
  const auto p = scalar_lgssm_params(1.0, 2.0, 0.5, 1.0, 3.0, 0.5);
  const Observations obs(1, 1, {4.0});
  const auto smoothed = rts_smoother(p, obs);
  const double precision = 1.0 / 2.0 + 9.0 / 0.5;
  const double mean = (1.0 / 2.0 + 3.0 * 4.0 / 0.5) / precision;
  EXPECT_NEAR(smoothed.means[0](0), mean, 1e-12);
  EXPECT_NEAR(smoothed.covs[0](0, 0), 1.0 / precision, 1e-12);
}

TEST(RtsSmoother, InvariantToObservationScaling) {
  const auto p = benchmark_lgssm_params(11);
  RandomStream rng(12);
  const auto obs = lgssm_simulate(p, 10, rng).observations;
  auto scaled = p;
  const double s = 7.5;
  scaled.emission *= s;
  scaled.emission_cov *= s * s;
  std::vector<double> values(obs.values().begin(), obs.values().end());
  for (auto& v : values) {
    v *= s;
  }
  const Observations scaled_obs(obs.horizon(), obs.dim(), values);
  const auto a = rts_smoother(p, obs);
  const auto b = rts_smoother(scaled, scaled_obs);
  for (std::size_t t = 0; t < 10; ++t) {
    EXPECT_LT((a.means[t] - b.means[t]).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((a.covs[t] - b.covs[t]).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(LgssmSimulate, BitReproducible) {
  const auto p = benchmark_lgssm_params(13);
  RandomStream a(14);
  RandomStream b(14);
  const auto x = lgssm_simulate(p, 30, a);
  const auto y = lgssm_simulate(p, 30, b);
  EXPECT_EQ(x.latents, y.latents);
  EXPECT_EQ(x.observations, y.observations);
}

TEST(LgssmParams, ValidationRejectsBadShapes) {
  auto p = benchmark_lgssm_params(1);
  p.emission_cov = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(p.validate(), DimensionMismatch);
  auto q = scalar_lgssm_params(0.0, -1.0, 0.9, 1.0, 1.0, 1.0);
  EXPECT_THROW(q.validate(), NotPositiveDefinite);
}

TEST(Nlssm, TransitionMeanValues) {
  EXPECT_NEAR(nlssm_transition_mean(2.0, 0.0), 8.0 * std::cos(2.4), 1e-15);
  const double big = 1e8;
  EXPECT_NEAR(nlssm_transition_mean(3.0, big) - big / 2.0, 8.0 * std::cos(3.6), 1e-6);
}

TEST(Nlssm, ObservationSymmetricAndDensitiesFinite) {
  const NonlinearModel model;
  const std::vector<double> y{3.0};
  for (const double x : {0.0, 0.5, 4.0, 30.0, 1e3}) {
    const Trajectory plus(1, 1, {x});
    const Trajectory minus(1, 1, {-x});
    const double lp = model.log_observation(0, PathView(plus, 1), y);
    EXPECT_EQ(lp, model.log_observation(0, PathView(minus, 1), y));
    EXPECT_TRUE(std::isfinite(lp));
    EXPECT_TRUE(std::isfinite(model.log_transition(1, PathView(plus, 1), std::vector<double>{-x})));
    EXPECT_TRUE(std::isfinite(model.log_initial(std::vector<double>{x})));
  }
}

TEST(Nlssm, RejectsNonPositiveScales) {
  NlssmParams p;
  p.observation_sd = 0.0;
  EXPECT_THROW(p.validate(), InvalidConfig);
}

TEST(DiscreteHmm, UntiedEmissionsGiveUniformPosterior) {
  DiscreteHmm hmm{2, 2, {0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, {0.3, 0.7, 0.3, 0.7}};
  const Observations obs(3, 1, {0.0, 1.0, 1.0});
  const auto post = hmm_exact_posterior(hmm, obs);
  for (const double p : post.path_probabilities) {
    EXPECT_NEAR(p, 1.0 / 8.0, 1e-15);
  }
}

TEST(DiscreteHmm, SingleStepPosteriorIsPriorTimesEmission) {
  const auto hmm = two_state_hmm();
  const Observations obs(1, 1, {2.0});
  const auto post = hmm_exact_posterior(hmm, obs);
  const double a = 0.6 * 0.1;
  const double b = 0.4 * 0.6;
  EXPECT_NEAR(post.path_probabilities[0], a / (a + b), 1e-15);
  EXPECT_NEAR(post.log_evidence, std::log(a + b), 1e-15);
}

TEST(DiscreteHmm, EnumerationMatchesForwardBackward) {
  const auto hmm = two_state_hmm();
  RandomStream rng(15);
  for (const std::size_t horizon : {1U, 3U, 8U, 14U}) {
    const auto sample = hmm_simulate(hmm, horizon, rng);
    const auto exact = hmm_exact_posterior(hmm, sample.observations);
    const auto fb = hmm_forward_backward(hmm, sample.observations);
    EXPECT_NEAR(exact.log_evidence, fb.log_evidence, 1e-12);
    for (std::size_t k = 0; k < exact.marginals.size(); ++k) {
      EXPECT_NEAR(exact.marginals[k], fb.marginals[k], 1e-12);
    }
  }
}

TEST(DiscreteHmm, EnumerationLimit) {
  const auto hmm = two_state_hmm();
  const Observations obs(21, 1, std::vector<double>(21, 0.0));
  EXPECT_THROW((void)hmm_exact_posterior(hmm, obs), EnumerationTooLarge);
  EXPECT_NO_THROW((void)hmm_forward_backward(hmm, obs));
}

TEST(DiscreteHmm, PathIndexRoundTrip) {
  for (std::size_t k = 0; k < 27; ++k) {
    EXPECT_EQ(path_index(path_from_index(k, 3, 3), 3), k);
  }
  EXPECT_EQ(path_index(Trajectory(3, 1, {1.0, 0.0, 1.0}), 2), 5U);
}

TEST(DiscreteHmm, ValidationRejectsBadRows) {
  auto hmm = two_state_hmm();
  hmm.transition = {0.5, 0.4, 0.3, 0.7};
  EXPECT_THROW(hmm.validate(), InvalidWeight);
  hmm = two_state_hmm();
  hmm.emission.pop_back();
  EXPECT_THROW(hmm.validate(), DimensionMismatch);
}

TEST(DiscreteHmm, ModelRejectsNonIntegerStates) {
  const DiscreteHmmModel model(two_state_hmm());
  EXPECT_THROW((void)model.log_initial(std::vector<double>{0.5}), IndexOutOfRange);
}

}  // namespace
}  // namespace ipmcmc::models
