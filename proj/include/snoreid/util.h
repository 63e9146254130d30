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

#ifndef SNOREID_UTIL_H_
#define SNOREID_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace snoreid {

using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits; identical on every platform, unlike
// std::uniform_real_distribution.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on UniformUnit.
double StandardNormal(Rng& rng);

// Independent seed for a numbered sub-stream of `base` (splitmix64 mix).
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream);

std::string Sha256Hex(std::string_view data);

}  // namespace snoreid

#endif  // SNOREID_UTIL_H_
