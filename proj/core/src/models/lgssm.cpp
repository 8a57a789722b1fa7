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

#include "ipmcmc/models/lgssm.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "ipmcmc/errors.hpp"

namespace ipmcmc::models {

namespace {

constexpr std::size_t kMaxDim = 64;

void require_spd(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(name) + " is not square");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw NotPositiveDefinite(std::string(name) + " is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(name) + " is not positive definite");
  }
}

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    }
  }
  return out;
}

Eigen::MatrixXd rotation(int axis, double angle) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const int a = (axis + 1) % 3;
  const int b = (axis + 2) % 3;
  r(a, a) = c;
  r(a, b) = -s;
  r(b, a) = s;
  r(b, b) = c;
  return r;
}

// log N(y; mean, cov) through a Cholesky factorization.
double gaussian_log_pdf(const Eigen::VectorXd& residual, const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::VectorXd z = llt.matrixL().solve(residual);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const auto k = static_cast<double>(residual.size());
  return -0.5 * (z.squaredNorm() + log_det + k * std::log(2.0 * std::numbers::pi));
}

}  // namespace

void LgssmParams::validate() const {
  const auto d = initial_mean.size();
  const auto k = emission.rows();
  if (d == 0 || k == 0) {
    throw DimensionMismatch("LGSSM dimensions must be positive");
  }
  if (initial_cov.rows() != d || transition.rows() != d || transition.cols() != d ||
      transition_cov.rows() != d || emission.cols() != d || emission_cov.rows() != k) {
    throw DimensionMismatch("LGSSM parameter shapes are inconsistent");
  }
  require_spd(initial_cov, "initial_cov");
  require_spd(transition_cov, "transition_cov");
  require_spd(emission_cov, "emission_cov");
}

Eigen::Matrix3d benchmark_lgssm_transition() {
  const double pi = std::numbers::pi;
  const Eigen::MatrixXd combined = rotation(2, pi / 20.0) * rotation(1, 3.0 * pi / 10.0) * rotation(0, 7.0 * pi / 10.0);
  return 0.99 * Eigen::Matrix3d(combined);
}

LgssmParams benchmark_lgssm_params(std::uint64_t seed) {
  constexpr int kStates = 3;
  constexpr int kObs = 20;
  LgssmParams p;
  p.initial_mean = Eigen::Vector3d(0.0, 1.0, 1.0);
  p.initial_cov = 0.1 * Eigen::MatrixXd::Identity(kStates, kStates);
  p.transition = benchmark_lgssm_transition();
  p.transition_cov = Eigen::MatrixXd::Identity(kStates, kStates);
  p.emission_cov = 0.1 * Eigen::MatrixXd::Identity(kObs, kObs);
  p.emission.resize(kObs, kStates);

  RandomStream rng = RandomStream(seed).derive("lgssm-emission");
  std::gamma_distribution<double> gamma(0.2, 1.0);
  for (int c = 0; c < kStates; ++c) {
    double total = 0.0;
    do {
      total = 0.0;
      for (int r = 0; r < kObs; ++r) {
        p.emission(r, c) = gamma(rng.engine());
        total += p.emission(r, c);
      }
    } while (!(total > 0.0));
    p.emission.col(c) /= total;
  }
  return p;
}

LgssmParams scalar_lgssm_params(double initial_mean, double initial_var, double transition,
                                double transition_var, double emission, double emission_var) {
  LgssmParams p;
  p.initial_mean = Eigen::VectorXd::Constant(1, initial_mean);
  p.initial_cov = Eigen::MatrixXd::Constant(1, 1, initial_var);
  p.transition = Eigen::MatrixXd::Constant(1, 1, transition);
  p.transition_cov = Eigen::MatrixXd::Constant(1, 1, transition_var);
  p.emission = Eigen::MatrixXd::Constant(1, 1, emission);
  p.emission_cov = Eigen::MatrixXd::Constant(1, 1, emission_var);
  return p;
}

LinearGaussianModel::Gaussian LinearGaussianModel::make_gaussian(const Eigen::MatrixXd& cov) {
  Gaussian g;
  const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  g.chol = row_major(lower);
  const auto k = static_cast<double>(cov.rows());
  g.log_norm = -0.5 * (k * std::log(2.0 * std::numbers::pi) + 2.0 * lower.diagonal().array().log().sum());
  const Eigen::MatrixXd off = cov - Eigen::MatrixXd(cov.diagonal().asDiagonal());
  g.diagonal = off.cwiseAbs().maxCoeff() == 0.0;
  if (g.diagonal) {
    g.inv_sd.resize(static_cast<std::size_t>(cov.rows()));
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      g.inv_sd[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(cov(i, i));
    }
  }
  return g;
}

LinearGaussianModel::LinearGaussianModel(LgssmParams params)
    : params_(std::move(params)), state_dim_(params_.state_dim()), obs_dim_(params_.observation_dim()) {
  params_.validate();
  if (state_dim_ > kMaxDim || obs_dim_ > kMaxDim) {
    throw DimensionMismatch("LinearGaussianModel supports at most 64 state and observation dimensions");
  }
  transition_ = row_major(params_.transition);
  emission_ = row_major(params_.emission);
  initial_ = make_gaussian(params_.initial_cov);
  process_ = make_gaussian(params_.transition_cov);
  noise_ = make_gaussian(params_.emission_cov);
}

double LinearGaussianModel::log_density(const Gaussian& g, const double* residual, std::size_t k) const {
  double quad = 0.0;
  if (g.diagonal) {
    for (std::size_t i = 0; i < k; ++i) {
      const double z = residual[i] * g.inv_sd[i];
      quad += z * z;
    }
  } else {
    std::array<double, kMaxDim> z{};
    for (std::size_t i = 0; i < k; ++i) {
      double acc = residual[i];
      for (std::size_t j = 0; j < i; ++j) {
        acc -= g.chol[i * k + j] * z[j];
      }
      z[i] = acc / g.chol[i * k + i];
      quad += z[i] * z[i];
    }
  }
  return g.log_norm - 0.5 * quad;
}

void LinearGaussianModel::sample_noise(const Gaussian& g, std::size_t k, RandomStream& rng, double* out) const {
  std::array<double, kMaxDim> z{};
  for (std::size_t i = 0; i < k; ++i) {
    z[i] = rng.normal();
  }
  for (std::size_t i = 0; i < k; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      acc += g.chol[i * k + j] * z[j];
    }
    out[i] += acc;
  }
}

double LinearGaussianModel::log_initial(std::span<const double> x) const {
  std::array<double, kMaxDim> r{};
  for (std::size_t i = 0; i < state_dim_; ++i) {
    r[i] = x[i] - params_.initial_mean[static_cast<Eigen::Index>(i)];
  }
  return log_density(initial_, r.data(), state_dim_);
}

double LinearGaussianModel::log_transition(std::size_t /*t*/, const PathView& past,
                                           std::span<const double> x) const {
  const auto prev = past.back();
  std::array<double, kMaxDim> r{};
  for (std::size_t i = 0; i < state_dim_; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < state_dim_; ++j) {
      mean += transition_[i * state_dim_ + j] * prev[j];
    }
    r[i] = x[i] - mean;
  }
  return log_density(process_, r.data(), state_dim_);
}

double LinearGaussianModel::log_observation(std::size_t /*t*/, const PathView& path,
                                            std::span<const double> y) const {
  const auto x = path.back();
  std::array<double, kMaxDim> r{};
  for (std::size_t i = 0; i < obs_dim_; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < state_dim_; ++j) {
      mean += emission_[i * state_dim_ + j] * x[j];
    }
    r[i] = y[i] - mean;
  }
  return log_density(noise_, r.data(), obs_dim_);
}

void LinearGaussianModel::sample_initial(RandomStream& rng, std::span<double> out) const {
  for (std::size_t i = 0; i < state_dim_; ++i) {
    out[i] = params_.initial_mean[static_cast<Eigen::Index>(i)];
  }
  sample_noise(initial_, state_dim_, rng, out.data());
}

void LinearGaussianModel::sample_transition(std::size_t /*t*/, const PathView& past, RandomStream& rng,
                                            std::span<double> out) const {
  const auto prev = past.back();
  for (std::size_t i = 0; i < state_dim_; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < state_dim_; ++j) {
      mean += transition_[i * state_dim_ + j] * prev[j];
    }
    out[i] = mean;
  }
  sample_noise(process_, state_dim_, rng, out.data());
}

LgssmSample lgssm_simulate(const LgssmParams& params, std::size_t horizon, RandomStream& rng) {
  params.validate();
  const auto d = static_cast<Eigen::Index>(params.state_dim());
  const auto k = static_cast<Eigen::Index>(params.observation_dim());
  const Eigen::MatrixXd lv = params.initial_cov.llt().matrixL();
  const Eigen::MatrixXd lo = params.transition_cov.llt().matrixL();
  const Eigen::MatrixXd ls = params.emission_cov.llt().matrixL();
  auto normals = [&rng](Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      z[i] = rng.normal();
    }
    return z;
  };

  std::vector<double> xs(horizon * static_cast<std::size_t>(d));
  std::vector<double> ys(horizon * static_cast<std::size_t>(k));
  Eigen::VectorXd x;
  for (std::size_t t = 0; t < horizon; ++t) {
    if (t == 0) {
      x = params.initial_mean + lv * normals(d);
    } else {
      x = params.transition * x + lo * normals(d);
    }
    const Eigen::VectorXd y = params.emission * x + ls * normals(k);
    std::copy(x.data(), x.data() + d, xs.begin() + static_cast<std::ptrdiff_t>(t * static_cast<std::size_t>(d)));
    std::copy(y.data(), y.data() + k, ys.begin() + static_cast<std::ptrdiff_t>(t * static_cast<std::size_t>(k)));
  }
  return {Trajectory(horizon, static_cast<std::size_t>(d), std::move(xs)),
          Observations(horizon, static_cast<std::size_t>(k), std::move(ys))};
}

KalmanResult kalman_filter(const LgssmParams& params, const Observations& observations) {
  params.validate();
  if (observations.dim() != params.observation_dim()) {
    throw DimensionMismatch("observation dimension does not match the LGSSM");
  }
  const auto d = static_cast<Eigen::Index>(params.state_dim());
  const auto k = static_cast<Eigen::Index>(params.observation_dim());
  const Eigen::MatrixXd& a = params.transition;
  const Eigen::MatrixXd& b = params.emission;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  KalmanResult out;
  Eigen::VectorXd mean = params.initial_mean;
  Eigen::MatrixXd cov = params.initial_cov;
  for (std::size_t t = 0; t < observations.horizon(); ++t) {
    if (t > 0) {
      mean = a * mean;
      cov = a * cov * a.transpose() + params.transition_cov;
      cov = 0.5 * (cov + cov.transpose());
    }
    out.predicted_means.push_back(mean);
    out.predicted_covs.push_back(cov);

    const auto y_span = observations.at(t);
    const Eigen::Map<const Eigen::VectorXd> y(y_span.data(), k);
    const Eigen::VectorXd innovation = y - b * mean;
    Eigen::MatrixXd s = b * cov * b.transpose() + params.emission_cov;
    s = 0.5 * (s + s.transpose());
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("innovation covariance at step " + std::to_string(t) +
                                " is not positive definite");
    }
    out.log_evidence += gaussian_log_pdf(innovation, llt);

    const Eigen::MatrixXd gain = llt.solve(b * cov).transpose();  // cov B^T S^-1
    mean = mean + gain * innovation;
    const Eigen::MatrixXd ikh = identity - gain * b;
    cov = ikh * cov * ikh.transpose() + gain * params.emission_cov * gain.transpose();
    cov = 0.5 * (cov + cov.transpose());
    out.filtered_means.push_back(mean);
    out.filtered_covs.push_back(cov);
  }
  return out;
}

SmootherResult rts_smoother(const LgssmParams& params, const KalmanResult& filtered) {
  const std::size_t horizon = filtered.filtered_means.size();
  SmootherResult out;
  out.means.resize(horizon);
  out.covs.resize(horizon);
  if (horizon == 0) {
    return out;
  }
  out.means[horizon - 1] = filtered.filtered_means[horizon - 1];
  out.covs[horizon - 1] = filtered.filtered_covs[horizon - 1];
  for (std::size_t t = horizon - 1; t-- > 0;) {
    const Eigen::MatrixXd& p_pred = filtered.predicted_covs[t + 1];
    const Eigen::LLT<Eigen::MatrixXd> llt(p_pred);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("predicted covariance at step " + std::to_string(t + 1) +
                                " is not positive definite");
    }
    // J = P_t A^T P_{t+1|t}^-1
    const Eigen::MatrixXd j = llt.solve(params.transition * filtered.filtered_covs[t]).transpose();
    out.means[t] = filtered.filtered_means[t] + j * (out.means[t + 1] - filtered.predicted_means[t + 1]);
    Eigen::MatrixXd cov = filtered.filtered_covs[t] + j * (out.covs[t + 1] - p_pred) * j.transpose();
    out.covs[t] = 0.5 * (cov + cov.transpose());
  }
  return out;
}

SmootherResult rts_smoother(const LgssmParams& params, const Observations& observations) {
  return rts_smoother(params, kalman_filter(params, observations));
}

}  // namespace ipmcmc::models
