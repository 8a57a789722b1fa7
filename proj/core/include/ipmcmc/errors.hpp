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

#ifndef IPMCMC_ERRORS_HPP
#define IPMCMC_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

/**
 * \file
 * \brief Exception types raised by the samplers, estimators and oracles.
 */

namespace ipmcmc {

/// Base class of every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every weight in a weight vector is zero (every log-weight is -inf).
/**
 * When raised from inside a sweep, `step()` holds the 0-based time step at which the
 * particle system collapsed.
 */
class AllZeroWeights : public Error {
 public:
  AllZeroWeights() : Error("all weights are zero") {}
  explicit AllZeroWeights(std::size_t step)
      : Error("all weights are zero at step " + std::to_string(step)), step_(step) {}

  [[nodiscard]] std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// A log-weight is NaN or +inf.
class InvalidWeight : public Error {
 public:
  using Error::Error;
};

/// A particle, node or slot index is outside its valid range.
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// The retained trajectory handed to a conditional sweep has the wrong shape.
class RetainedLengthMismatch : public Error {
 public:
  using Error::Error;
};

/// Operands of an estimator or model have inconsistent dimensions.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An estimator was asked to summarize an empty set of records.
class EmptyRecord : public Error {
 public:
  EmptyRecord() : Error("no records to estimate from") {}
  using Error::Error;
};

/// A configuration value violates its constraints. `field()` is the dotted path.
class InvalidConfig : public Error {
 public:
  InvalidConfig(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A matrix that must be symmetric positive definite is not.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would visit more paths than allowed.
class EnumerationTooLarge : public Error {
 public:
  using Error::Error;
};

/// Ground truth was requested for a model that has no exact or reference oracle.
class NoOracleForModel : public Error {
 public:
  using Error::Error;
};

}  // namespace ipmcmc

#endif  // IPMCMC_ERRORS_HPP
