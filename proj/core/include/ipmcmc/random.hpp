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

#ifndef IPMCMC_RANDOM_HPP
#define IPMCMC_RANDOM_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace ipmcmc {

/// A seeded pseudo-random stream with labelled, position-independent splitting.
/**
 * Every stream carries a 64-bit key. `derive(label, index)` hashes the parent key
 * together with the label and index into a fresh key, so the child depends only on
 * the parent's key and never on how many draws the parent has consumed. This is what
 * makes per-(node, iteration) streams reproducible under any worker scheduling.
 *
 * Identical keys yield identical draw sequences. Streams derived with different
 * labels or indices are seeded from unrelated keys and treated as independent.
 */
class RandomStream {
 public:
  using engine_type = std::mt19937_64;

  explicit RandomStream(std::uint64_t seed);

  /// Child stream keyed by (this key, label, index).
  [[nodiscard]] RandomStream derive(std::string_view label, std::uint64_t index = 0) const;

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

  /// Uniform draw on [0, 1).
  double uniform();

  /// Standard normal draw.
  double normal();

  /// Draws index i with probability probs[i] / sum(probs). Zero entries are never drawn.
  std::size_t categorical(std::span<const double> probs);

  engine_type& engine() noexcept { return engine_; }

 private:
  struct FromKey {};
  RandomStream(FromKey, std::uint64_t key);

  std::uint64_t key_;
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ipmcmc

#endif  // IPMCMC_RANDOM_HPP
