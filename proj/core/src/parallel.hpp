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

#ifndef IPMCMC_SRC_PARALLEL_HPP
#define IPMCMC_SRC_PARALLEL_HPP

#include <algorithm>
#include <cstddef>

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace ipmcmc::detail {

// Runs body(i) for i in [0, count) on at most `workers` threads. Exceptions thrown by
// a body propagate to the caller.
template <typename Body>
void for_each_index(std::size_t count, std::size_t workers, const Body& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  tbb::task_arena arena(static_cast<int>(std::min(workers, count)));
  arena.execute([&] {
    tbb::parallel_for(std::size_t{0}, count, [&](std::size_t i) { body(i); });
  });
}

}  // namespace ipmcmc::detail

#endif  // IPMCMC_SRC_PARALLEL_HPP
