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

#include "snoreid/kernels.h"

#include <cmath>

#include "gtest/gtest.h"
#include "snoreid/dsp.h"
#include "unit/test_util.h"

namespace snoreid {
namespace {

using testing::GaussianMatrix;

// Restores a single-threaded team after each test.
class KernelsTest : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { kernels::SetNumThreads(GetParam()); }
  void TearDown() override { kernels::SetNumThreads(1); }
};

struct GmmFixture {
  Matrix frames = GaussianMatrix(1000, 7, 1);
  Matrix means = GaussianMatrix(4, 7, 2);
  Matrix inv_vars = GaussianMatrix(4, 7, 3, 0.1, 1.0);
  std::vector<double> log_consts = {-9.0, -9.5, -10.0, -8.7};
};

void ExpectClose(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) {
    EXPECT_NEAR(a.data()[i], b.data()[i], tol * (1.0 + std::abs(b.data()[i])));
  }
}

TEST_P(KernelsTest, ElementwiseKernelsAreBitwiseEqual) {
  const auto signal = testing::NoiseSignal(16000, 4);
  const auto window = HannWindow(400);
  EXPECT_EQ(kernels::omp::FramePowerSpectra(signal, window, 160, 512),
            kernels::serial::FramePowerSpectra(signal, window, 160, 512));

  const MfccConfig c;
  const Matrix power = kernels::serial::FramePowerSpectra(signal, window, 160, 512);
  const Matrix fb = MelFilterbank(c), dct = DctMatrix(25, 40);
  EXPECT_EQ(kernels::omp::MelCepstra(power, fb, dct, 1e-10),
            kernels::serial::MelCepstra(power, fb, dct, 1e-10));

  GmmFixture g;
  Matrix post_s, post_o;
  EXPECT_EQ(kernels::omp::GmmPosteriors(g.frames, g.means, g.inv_vars, g.log_consts, &post_o),
            kernels::serial::GmmPosteriors(g.frames, g.means, g.inv_vars, g.log_consts, &post_s));
  EXPECT_EQ(post_o, post_s);

  const Matrix x = GaussianMatrix(33, 50, 5), w = GaussianMatrix(20, 50, 6);
  const Matrix delta = GaussianMatrix(33, 20, 7);
  const std::vector<double> b(20, 0.25);
  EXPECT_EQ(kernels::omp::DenseForward(x, w, b), kernels::serial::DenseForward(x, w, b));
  EXPECT_EQ(kernels::omp::DenseWeightGrad(delta, x), kernels::serial::DenseWeightGrad(delta, x));
  EXPECT_EQ(kernels::omp::DenseInputGrad(delta, w), kernels::serial::DenseInputGrad(delta, w));
  EXPECT_EQ(kernels::omp::DotScores(x, w), kernels::serial::DotScores(x, w));
}

TEST_P(KernelsTest, ReductionsMatchSerialClosely) {
  GmmFixture g;
  Matrix post;
  kernels::serial::GmmPosteriors(g.frames, g.means, g.inv_vars, g.log_consts, &post);
  const auto s = kernels::serial::AccumulateMixtureStats(g.frames, post);
  const auto o = kernels::omp::AccumulateMixtureStats(g.frames, post);
  for (std::size_t k = 0; k < s.occupancy.size(); ++k) {
    EXPECT_NEAR(o.occupancy[k], s.occupancy[k], 1e-12 * g.frames.rows());
  }
  ExpectClose(o.first_order, s.first_order, 1e-12);
  ExpectClose(kernels::omp::WeightedSquaredDeviation(g.frames, post, g.means),
              kernels::serial::WeightedSquaredDeviation(g.frames, post, g.means), 1e-12);
  const auto v = testing::NoiseSignal(5000, 8);
  EXPECT_NEAR(kernels::omp::Sum(v), kernels::serial::Sum(v), 1e-11);
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelsTest, ::testing::Values(1, 2, 4));

TEST(KernelsInvarianceTest, ReductionsIndependentOfThreadCount) {
  GmmFixture g;
  Matrix post;
  kernels::serial::GmmPosteriors(g.frames, g.means, g.inv_vars, g.log_consts, &post);
  const auto v = testing::NoiseSignal(5003, 8);
  kernels::SetNumThreads(1);
  const auto ref = kernels::omp::AccumulateMixtureStats(g.frames, post);
  const Matrix ref_dev = kernels::omp::WeightedSquaredDeviation(g.frames, post, g.means);
  const double ref_sum = kernels::omp::Sum(v);
  for (int threads : {2, 3, 8}) {
    kernels::SetNumThreads(threads);
    const auto got = kernels::omp::AccumulateMixtureStats(g.frames, post);
    EXPECT_EQ(got.occupancy, ref.occupancy) << threads;
    EXPECT_EQ(got.first_order, ref.first_order) << threads;
    EXPECT_EQ(kernels::omp::WeightedSquaredDeviation(g.frames, post, g.means), ref_dev);
    EXPECT_EQ(kernels::omp::Sum(v), ref_sum);
  }
  kernels::SetNumThreads(1);
}

TEST(KernelsInvarianceTest, PosteriorRowsSumToOne) {
  GmmFixture g;
  Matrix post;
  const auto ll = kernels::serial::GmmPosteriors(g.frames, g.means, g.inv_vars, g.log_consts, &post);
  for (std::size_t t = 0; t < post.rows(); ++t) {
    double s = 0.0;
    for (double p : post.row(t)) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_TRUE(std::isfinite(ll[t]));
  }
}

}  // namespace
}  // namespace snoreid
