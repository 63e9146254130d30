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

#ifndef SNOREID_TESTS_UNIT_TEST_UTIL_H_
#define SNOREID_TESTS_UNIT_TEST_UTIL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "snoreid/dsp.h"
#include "snoreid/matrix.h"
#include "snoreid/util.h"

namespace snoreid::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("snoreid_" + tag + "_" + std::to_string(rng() % 1000000000));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> NoiseSignal(std::size_t n, std::uint64_t seed, double scale = 0.3) {
  Rng rng(seed);
  std::vector<double> s(n);
  for (auto& v : s) v = scale * StandardNormal(rng);
  return s;
}

inline Matrix GaussianMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                             double scale = 1.0, double shift = 0.0) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = shift + scale * StandardNormal(rng);
  return m;
}

inline FeatureMatrix AsFeatures(Matrix m) {
  FeatureMatrix f;
  f.frames = std::move(m);
  return f;
}

}  // namespace snoreid::testing

#endif  // SNOREID_TESTS_UNIT_TEST_UTIL_H_
