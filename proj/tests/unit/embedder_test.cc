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

#include "snoreid/embedder.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles/oracles.h"
#include "snoreid/error.h"
#include "unit/test_util.h"

namespace snoreid {
namespace {

using testing::AsFeatures;
using testing::GaussianMatrix;

using DevSet = std::map<std::string, std::vector<FeatureMatrix>>;

// Subjects whose frames sit around distinct constant offsets.
DevSet SeparableDev(int subjects, std::size_t frames, std::size_t dim, std::uint64_t seed) {
  DevSet dev;
  for (int s = 0; s < subjects; ++s) {
    for (int u = 0; u < 2; ++u) {
      dev["s" + std::to_string(s)].push_back(
          AsFeatures(GaussianMatrix(frames, dim, seed + 10 * s + u, 0.3, 2.0 * s)));
    }
  }
  return dev;
}

TrainConfig SmallConfig(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.hidden_dims = {16, 16};
  c.batch_size = 16;
  c.seed = 3;
  return c;
}

double RelErr(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-7}); }

TEST(NetworkTest, InitializeShapes) {
  const auto net = EmbeddingNetwork::Initialize(1250, {128, 128, 128, 128}, {"a", "b", "c"}, 0.15, 1);
  EXPECT_EQ(net.dims(), (std::vector<std::size_t>{1250, 128, 128, 128, 128, 3}));
  EXPECT_EQ(net.embedding_dim(), 128u);
  EXPECT_EQ(net.num_hidden(), 4u);
  const double limit = std::sqrt(6.0 / 1250.0);
  for (std::size_t i = 0; i < 128 * 1250; ++i) {
    EXPECT_LE(std::abs(net.layers()[0].weights.data()[i]), limit);
  }
  for (double b : net.layers()[0].bias) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(net.input_mean(), std::vector<double>(1250, 0.0));
  EXPECT_EQ(net.input_scale(), std::vector<double>(1250, 1.0));
}

TEST(NetworkTest, GradientMatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto net = EmbeddingNetwork::Initialize(6, {5, 4}, {"a", "b", "c"}, 0.15, seed);
    for (auto& layer : net.mutable_layers()) {
      for (double& b : layer.bias) b = 0.1;
    }
    const Matrix x = GaussianMatrix(4, 6, 100 + seed);
    const std::vector<int> labels = {0, 2, 1, 2};
    Matrix mask(4, 4, 1.0 / 0.85);
    mask(1, 2) = 0.0;
    mask(3, 0) = 0.0;
    Gradients g;
    const double loss = Backward(net, x, labels, &mask, &g);
    EXPECT_NEAR(loss, Loss(net, x, labels, &mask), 1e-14);

    const double h = 1e-6;
    auto& layers = net.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (std::size_t i = 0; i < layers[l].weights.rows() * layers[l].weights.cols(); ++i) {
        double& w = layers[l].weights.data()[i];
        const double orig = w;
        w = orig + h;
        const double up = Loss(net, x, labels, &mask);
        w = orig - h;
        const double down = Loss(net, x, labels, &mask);
        w = orig;
        EXPECT_LE(RelErr(g.weights[l].data()[i], (up - down) / (2 * h)), 1e-4)
            << "seed " << seed << " layer " << l << " weight " << i;
      }
      for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
        double& b = layers[l].bias[i];
        const double orig = b;
        b = orig + h;
        const double up = Loss(net, x, labels, &mask);
        b = orig - h;
        const double down = Loss(net, x, labels, &mask);
        b = orig;
        EXPECT_LE(RelErr(g.biases[l][i], (up - down) / (2 * h)), 1e-4)
            << "seed " << seed << " layer " << l << " bias " << i;
      }
    }
  }
}

TEST(TrainTest, LossDecreasesOverFirstEpochs) {
  TrainTrace trace;
  TrainNetwork(SeparableDev(3, 30, 4, 1), SmallConfig(5), &trace);
  ASSERT_EQ(trace.epoch_loss.size(), 5u);
  for (std::size_t e = 1; e < 5; ++e) EXPECT_LT(trace.epoch_loss[e], trace.epoch_loss[e - 1]);
}

TEST(TrainTest, SeparableSubjectsAreLearned) {
  const DevSet dev = SeparableDev(2, 40, 3, 5);
  const EmbeddingNetwork net = TrainNetwork(dev, SmallConfig(10));
  EXPECT_GT(ClassificationAccuracy(net, dev), 0.95);
  EXPECT_EQ(net.subject_labels(), (std::vector<std::string>{"s0", "s1"}));
}

TEST(TrainTest, DeterministicInSeed) {
  const DevSet dev = SeparableDev(2, 20, 3, 7);
  const auto a = TrainNetwork(dev, SmallConfig(3));
  const auto b = TrainNetwork(dev, SmallConfig(3));
  EXPECT_EQ(NetworkFingerprint(a), NetworkFingerprint(b));
  TrainConfig other = SmallConfig(3);
  other.seed = 4;
  EXPECT_NE(NetworkFingerprint(a), NetworkFingerprint(TrainNetwork(dev, other)));
}

TEST(TrainTest, Errors) {
  DevSet one;
  one["a"].push_back(AsFeatures(GaussianMatrix(10, 2, 1)));
  try {
    TrainNetwork(one, SmallConfig(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewSubjects);
  }
  DevSet empty;
  empty["a"];
  empty["b"];
  try {
    TrainNetwork(empty, SmallConfig(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDevelopmentSet);
  }
}

TEST(EmbeddingTest, MatchesStraightLineOracleAndIsUnit) {
  const DevSet dev = SeparableDev(3, 25, 4, 9);
  const EmbeddingNetwork net = TrainNetwork(dev, SmallConfig(2));
  for (const auto& [id, list] : dev) {
    std::vector<SnoreEmbedding> utts;
    for (const FeatureMatrix& f : list) {
      const SnoreEmbedding e = UtteranceEmbedding(net, f);
      const auto want = oracle::UtteranceEmbedding(net, f, 15, 5);
      ASSERT_EQ(e.vector.size(), want.size());
      double norm = 0.0;
      for (std::size_t j = 0; j < want.size(); ++j) {
        EXPECT_NEAR(e.vector[j], want[j], 1e-9);
        norm += e.vector[j] * e.vector[j];
      }
      EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
      EXPECT_EQ(e.level, EmbeddingLevel::kUtterance);
      utts.push_back(e);
    }
    const SnoreEmbedding subject = SubjectEmbedding(utts, id);
    EXPECT_EQ(subject.level, EmbeddingLevel::kSubject);
    EXPECT_EQ(subject.subject_id, id);
    double norm = 0.0;
    for (double v : subject.vector) norm += v * v;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
  }
}

TEST(EmbeddingTest, SumAndMeanAgree) {
  const DevSet dev = SeparableDev(2, 25, 3, 11);
  const EmbeddingNetwork net = TrainNetwork(dev, SmallConfig(1));
  const FeatureMatrix& f = dev.begin()->second.front();
  const auto sum = UtteranceEmbedding(net, f, {15, 5, Accumulation::kSum});
  const auto mean = UtteranceEmbedding(net, f, {15, 5, Accumulation::kMean});
  for (std::size_t j = 0; j < sum.vector.size(); ++j) EXPECT_NEAR(sum.vector[j], mean.vector[j], 1e-12);
}

// One hidden ReLU pair driven by the window mean of a 1-D feature.
EmbeddingNetwork WindowMeanNetwork() {
  DenseLayer hidden{Matrix(2, kContextFrames, 1.0 / kContextFrames), {0.0, 0.0}};
  hidden.weights(1, 0) = 2.0 / kContextFrames;
  DenseLayer out{Matrix(2, 2, 0.5), {0.0, 0.0}};
  return EmbeddingNetwork({hidden, out}, 0.0, {"a", "b"}, std::vector<double>(kContextFrames, 0.0),
                          std::vector<double>(kContextFrames, 1.0));
}

TEST(EmbeddingTest, ZeroActivationObservationsAreSkipped) {
  const EmbeddingNetwork net = WindowMeanNetwork();
  Matrix m(100, 1, -1.0);
  for (std::size_t t = 0; t < 10; ++t) m(t, 0) = 1.0;  // only early windows are positive
  const FeatureMatrix f = AsFeatures(m);
  const SnoreEmbedding e = UtteranceEmbedding(net, f);
  const auto want = oracle::UtteranceEmbedding(net, f, 15, 5);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(e.vector[j], want[j], 1e-12);

  try {
    UtteranceEmbedding(net, AsFeatures(Matrix(100, 1, -1.0)));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kNormalizationDegenerate);
  }
}

TEST(EmbeddingTest, NormalizeAndSubjectErrors) {
  const std::vector<double> zero(3, 0.0);
  EXPECT_THROW(L2Normalize(zero), Error);
  const auto unit = L2Normalize(std::vector<double>{3.0, 4.0});
  EXPECT_DOUBLE_EQ(unit[0], 0.6);
  EXPECT_DOUBLE_EQ(unit[1], 0.8);
  try {
    SubjectEmbedding({}, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(NetworkJsonTest, RoundTripIsExact) {
  const DevSet dev = SeparableDev(2, 20, 3, 13);
  const EmbeddingNetwork net = TrainNetwork(dev, SmallConfig(1));
  const EmbeddingNetwork back = NetworkFromJson(nlohmann::json::parse(NetworkToJson(net).dump()));
  EXPECT_EQ(NetworkFingerprint(back), NetworkFingerprint(net));
  EXPECT_EQ(back.dims(), net.dims());
  EXPECT_EQ(back.input_scale(), net.input_scale());
  EXPECT_EQ(back.layers()[1].weights, net.layers()[1].weights);
}

TEST(NetworkJsonTest, EmbeddingCsv) {
  std::vector<SnoreEmbedding> e = {{{0.6, 0.8}, EmbeddingLevel::kSubject, "s1"}};
  std::ostringstream os;
  WriteEmbeddingCsv(os, e);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "subject_id,e0,e1");
}

}  // namespace
}  // namespace snoreid
