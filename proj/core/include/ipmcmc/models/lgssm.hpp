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

#ifndef IPMCMC_MODELS_LGSSM_HPP
#define IPMCMC_MODELS_LGSSM_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ipmcmc/model.hpp"
#include "ipmcmc/random.hpp"

/**
 * \file
 * \brief Linear Gaussian state space model with exact Kalman and RTS oracles.
 *
 *   x_1 ~ N(mu, V),  x_t = A x_{t-1} + N(0, Omega),  y_t = B x_t + N(0, Sigma).
 */

namespace ipmcmc::models {

struct LgssmParams {
  Eigen::VectorXd initial_mean;     // mu
  Eigen::MatrixXd initial_cov;      // V
  Eigen::MatrixXd transition;       // A
  Eigen::MatrixXd transition_cov;   // Omega
  Eigen::MatrixXd emission;         // B
  Eigen::MatrixXd emission_cov;     // Sigma

  [[nodiscard]] std::size_t state_dim() const { return static_cast<std::size_t>(initial_mean.size()); }
  [[nodiscard]] std::size_t observation_dim() const { return static_cast<std::size_t>(emission.rows()); }

  /// Throws DimensionMismatch on inconsistent shapes, NotPositiveDefinite on bad covariances.
  void validate() const;
};

/// The 3-D latent / 20-D observation benchmark.
/**
 * mu = (0, 1, 1), V = 0.1 I, Omega = I, Sigma = 0.1 I. The transition is 0.99 times
 * the rotations by 7pi/10, 3pi/10 and pi/20 about the first, second and third axes,
 * applied in that order. Each emission column is drawn from a symmetric
 * Dirichlet(0.2) on 20 categories using a stream derived from `seed`.
 */
[[nodiscard]] LgssmParams benchmark_lgssm_params(std::uint64_t seed);

/// Rotation part of the benchmark transition, scaled by 0.99.
[[nodiscard]] Eigen::Matrix3d benchmark_lgssm_transition();

/// Scalar model used for cheap evidence checks.
[[nodiscard]] LgssmParams scalar_lgssm_params(double initial_mean, double initial_var, double transition,
                                              double transition_var, double emission, double emission_var);

/// Particle-filter view of an LGSSM with prior proposals.
class LinearGaussianModel final : public StateSpaceModel {
 public:
  explicit LinearGaussianModel(LgssmParams params);

  [[nodiscard]] const LgssmParams& params() const noexcept { return params_; }

  [[nodiscard]] std::size_t state_dim() const override { return state_dim_; }
  [[nodiscard]] std::size_t observation_dim() const override { return obs_dim_; }
  [[nodiscard]] double log_initial(std::span<const double> x) const override;
  [[nodiscard]] double log_transition(std::size_t t, const PathView& past,
                                      std::span<const double> x) const override;
  [[nodiscard]] double log_observation(std::size_t t, const PathView& path,
                                       std::span<const double> y) const override;
  void sample_initial(RandomStream& rng, std::span<double> out) const override;
  void sample_transition(std::size_t t, const PathView& past, RandomStream& rng,
                         std::span<double> out) const override;

 private:
  // Row-major copies of the matrices and lower Cholesky factors, for allocation-free loops.
  struct Gaussian {
    std::vector<double> chol;  // lower triangular, row-major
    double log_norm = 0.0;     // -0.5 (k log 2pi + log det)
    bool diagonal = false;
    std::vector<double> inv_sd;  // diagonal case only
  };
  static Gaussian make_gaussian(const Eigen::MatrixXd& cov);
  [[nodiscard]] double log_density(const Gaussian& g, const double* residual, std::size_t k) const;
  void sample_noise(const Gaussian& g, std::size_t k, RandomStream& rng, double* out) const;

  LgssmParams params_;
  std::size_t state_dim_;
  std::size_t obs_dim_;
  std::vector<double> transition_;  // row-major A
  std::vector<double> emission_;    // row-major B
  Gaussian initial_;
  Gaussian process_;
  Gaussian noise_;
};

struct LgssmSample {
  Trajectory latents;
  Observations observations;
};

/// Forward simulation of T steps.
[[nodiscard]] LgssmSample lgssm_simulate(const LgssmParams& params, std::size_t horizon, RandomStream& rng);

struct KalmanResult {
  double log_evidence = 0.0;
  std::vector<Eigen::VectorXd> predicted_means;
  std::vector<Eigen::MatrixXd> predicted_covs;
  std::vector<Eigen::VectorXd> filtered_means;
  std::vector<Eigen::MatrixXd> filtered_covs;
};

/// Exact log p(y_{1:T}) and filtering moments; Joseph-form covariance updates.
/// Throws NotPositiveDefinite if an innovation covariance cannot be factorized.
[[nodiscard]] KalmanResult kalman_filter(const LgssmParams& params, const Observations& observations);

struct SmootherResult {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
};

/// Rauch-Tung-Striebel smoother moments of p(x_t | y_{1:T}).
[[nodiscard]] SmootherResult rts_smoother(const LgssmParams& params, const KalmanResult& filtered);
[[nodiscard]] SmootherResult rts_smoother(const LgssmParams& params, const Observations& observations);

}  // namespace ipmcmc::models

#endif  // IPMCMC_MODELS_LGSSM_HPP
