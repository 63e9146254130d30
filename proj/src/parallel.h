// Copyright (c) 2026 The snoreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNOREID_SRC_PARALLEL_H_
#define SNOREID_SRC_PARALLEL_H_

#include <cstddef>
#include <exception>
#include <mutex>

namespace snoreid::internal {

// Runs fn(i) for i in [0, n) on the OpenMP team. The first exception thrown
// by any iteration is rethrown on the calling thread after the loop.
template <typename Fn>
void ParallelFor(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  std::mutex mu;
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace snoreid::internal

#endif  // SNOREID_SRC_PARALLEL_H_
