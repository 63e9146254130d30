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

#include "snoreid/dsp.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles/oracles.h"
#include "snoreid/error.h"
#include "unit/test_util.h"

namespace snoreid {
namespace {

double FrameRelError(std::span<const double> got, const std::vector<double>& want) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    diff = std::max(diff, std::abs(got[i] - want[i]));
    scale = std::max(scale, std::abs(want[i]));
  }
  return diff / scale;
}

TEST(DspTest, MelScaleRoundTrip) {
  EXPECT_NEAR(HtkMel(700.0), 2595.0 * std::log10(2.0), 1e-12);
  for (double hz : {0.0, 80.0, 1000.0, 7999.0}) EXPECT_NEAR(HtkMelInverse(HtkMel(hz)), hz, 1e-9);
}

TEST(DspTest, HannWindowShape) {
  const auto w = HannWindow(400);
  EXPECT_DOUBLE_EQ(w.front(), 0.0);
  EXPECT_NEAR(w.back(), 0.0, 1e-15);
  for (int n = 0; n < 400; ++n) EXPECT_NEAR(w[n], w[399 - n], 1e-15);
  EXPECT_NEAR(*std::max_element(w.begin(), w.end()), 1.0, 1e-4);
}

TEST(DspTest, FrameCount) {
  const MfccConfig c;
  EXPECT_EQ(NumFrames(399, c), 0u);
  EXPECT_EQ(NumFrames(400, c), 1u);
  EXPECT_EQ(NumFrames(559, c), 1u);
  EXPECT_EQ(NumFrames(560, c), 2u);
  EXPECT_EQ(NumFrames(32000, c), 198u);
}

TEST(DspTest, FilterbankTrianglesPeakAtOne) {
  const MfccConfig c;
  const Matrix fb = MelFilterbank(c);
  ASSERT_EQ(fb.rows(), 40u);
  ASSERT_EQ(fb.cols(), 257u);
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    double peak = 0.0;
    for (std::size_t k = 0; k < fb.cols(); ++k) {
      EXPECT_GE(fb(m, k), 0.0);
      EXPECT_LE(fb(m, k), 1.0);
      peak = std::max(peak, fb(m, k));
    }
    // Narrow low triangles may not hit a bin centre exactly.
    EXPECT_GT(peak, m < 5 ? 0.2 : 0.5) << "filter " << m;
  }
}

TEST(DspTest, DctIsOrthonormal) {
  const Matrix d = DctMatrix(40, 40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      double dot = 0.0;
      for (int m = 0; m < 40; ++m) dot += d(i, m) * d(j, m);
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(DspTest, MfccMatchesOracle) {
  const MfccExtractor extractor;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    AudioClip clip{testing::NoiseSignal(400 + 160 * (5 + seed), 100 + seed), 16000};
    const FeatureMatrix f = extractor.Extract(clip);
    const auto want = oracle::Mfcc(clip.samples, extractor.config());
    ASSERT_EQ(f.num_frames(), want.size());
    ASSERT_EQ(f.dim(), 25u);
    for (std::size_t t = 0; t < want.size(); ++t) {
      EXPECT_LT(FrameRelError(f.frames.row(t), want[t]), 1e-6);
    }
  }
}

TEST(DspTest, PowerSpectrumMatchesDirectDft) {
  const MfccExtractor extractor;
  AudioClip clip{testing::NoiseSignal(400, 9), 16000};
  const Matrix p = extractor.PowerSpectrogram(clip);
  std::vector<long double> frame(400);
  const auto w = HannWindow(400);
  for (int n = 0; n < 400; ++n) frame[n] = w[n] * clip.samples[n];
  const auto want = oracle::DirectPowerSpectrum(frame, 512);
  for (int k = 0; k < 257; ++k) {
    EXPECT_NEAR(p(0, k), static_cast<double>(want[k]), 1e-9 * (1.0 + std::abs(p(0, k))));
  }
}

TEST(DspTest, SinusoidPeaksAtItsBin) {
  const MfccExtractor extractor;
  std::vector<double> s(16000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 0.5 * std::sin(2 * std::numbers::pi * 1000.0 * i / 16000.0);
  const Matrix p = extractor.PowerSpectrogram({s, 16000});
  for (std::size_t t = 0; t < p.rows(); ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.cols(); ++k) best = p(t, k) > p(t, best) ? k : best;
    EXPECT_EQ(best, 32u);  // 1000 Hz * 512 / 16000
  }
}

TEST(DspTest, SilenceHitsLogFloor) {
  const FeatureMatrix f = ExtractMfcc({std::vector<double>(800, 0.0), 16000});
  EXPECT_NEAR(f.frames(0, 0), std::sqrt(40.0) * std::log(1e-10), 1e-9);
  for (std::size_t i = 1; i < f.dim(); ++i) EXPECT_NEAR(f.frames(0, i), 0.0, 1e-9);
}

TEST(DspTest, Errors) {
  try {
    ExtractMfcc({std::vector<double>(399, 0.1), 16000});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kClipTooShort);
  }
  try {
    ExtractMfcc({std::vector<double>(1000, 0.1), 8000});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadSampleRate);
  }
}

TEST(DspTest, ContextStackingReplicatesEdges) {
  Matrix m(30, 2);
  for (std::size_t t = 0; t < 30; ++t) {
    m(t, 0) = static_cast<double>(t);
    m(t, 1) = -static_cast<double>(t);
  }
  const FeatureMatrix f = testing::AsFeatures(m);
  for (std::size_t center : {0u, 10u, 29u}) {
    const StackedFeature s = StackContext(f, center);
    ASSERT_EQ(s.vector.size(), 100u);
    for (int j = 0; j < kContextFrames; ++j) {
      const long t = std::clamp<long>(static_cast<long>(center) + j - kContextLeft, 0, 29);
      EXPECT_EQ(s.vector[2 * j], static_cast<double>(t));
      EXPECT_EQ(s.vector[2 * j + 1], -static_cast<double>(t));
    }
  }
  EXPECT_THROW(StackContext(f, 30), Error);
}

TEST(DspTest, ObservationCentersClampToLastFrame) {
  const auto c = ObservationCenters(198);
  ASSERT_EQ(c.size(), 15u);
  EXPECT_EQ(c.front(), 0u);
  EXPECT_EQ(c.back(), 70u);
  const auto short_clip = ObservationCenters(12);
  EXPECT_EQ(short_clip[2], 10u);
  EXPECT_EQ(short_clip[3], 11u);
  EXPECT_EQ(short_clip[14], 11u);
  EXPECT_EQ(SelectObservations(testing::AsFeatures(Matrix(12, 25, 1.0))).size(), 15u);
}

TEST(DspTest, FeatureCsvFormat) {
  Matrix m(1, 3);
  m(0, 0) = 1.0 / 3.0;
  m(0, 1) = -2.0;
  m(0, 2) = 1e-12;
  std::ostringstream os;
  WriteFeatureCsv(os, testing::AsFeatures(m));
  EXPECT_EQ(os.str(), "c0,c1,c2\n0.333333333,-2,1e-12\n");
}

}  // namespace
}  // namespace snoreid
