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

#include "ipmcmc/random.hpp"

#include "ipmcmc/errors.hpp"

namespace ipmcmc {

namespace {

// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

// FNV-1a over the label bytes.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : label) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::mt19937_64 seeded_engine(std::uint64_t key) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(key),
      static_cast<std::uint32_t>(key >> 32U),
      static_cast<std::uint32_t>(mix(key)),
      static_cast<std::uint32_t>(mix(key) >> 32U)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : RandomStream(FromKey{}, mix(seed)) {}

RandomStream::RandomStream(FromKey, std::uint64_t key) : key_(key), engine_(seeded_engine(key)) {}

RandomStream RandomStream::derive(std::string_view label, std::uint64_t index) const {
  const std::uint64_t child = mix(mix(key_ ^ hash_label(label)) + mix(index ^ 0x5851f42d4c957f2dULL));
  return RandomStream(FromKey{}, child);
}

// Top 53 bits scaled by 2^-53; unlike generate_canonical this never rounds up to 1.
double RandomStream::uniform() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

double RandomStream::normal() { return normal_(engine_); }

std::size_t RandomStream::categorical(std::span<const double> probs) {
  double total = 0.0;
  for (const double p : probs) {
    total += p;
  }
  if (!(total > 0.0)) {
    throw AllZeroWeights();
  }
  const double target = uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) {
      continue;
    }
    cumulative += probs[i];
    last_positive = i;
    if (target < cumulative) {
      return i;
    }
  }
  // Rounding can leave target == cumulative on the last step.
  return last_positive;
}

}  // namespace ipmcmc
