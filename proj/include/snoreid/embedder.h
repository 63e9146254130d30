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

#ifndef SNOREID_EMBEDDER_H_
#define SNOREID_EMBEDDER_H_

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "snoreid/dsp.h"
#include "snoreid/matrix.h"

namespace snoreid {

struct DenseLayer {
  Matrix weights;            // outputs x inputs
  std::vector<double> bias;  // outputs
};

// Frame-level subject classifier: stacked MFCC context -> ReLU hidden layers
// -> dropout -> softmax over development subjects. The activation of the last
// hidden layer is the embedding.
class EmbeddingNetwork {
 public:
  EmbeddingNetwork() = default;
  EmbeddingNetwork(std::vector<DenseLayer> layers, double dropout_rate,
                   std::vector<std::string> subject_labels,
                   std::vector<double> input_mean, std::vector<double> input_scale);

  // He-uniform weights, zero biases, identity input normalization.
  static EmbeddingNetwork Initialize(std::size_t input_dim,
                                     const std::vector<int>& hidden_dims,
                                     std::vector<std::string> subject_labels,
                                     double dropout_rate, std::uint64_t seed);

  std::size_t input_dim() const { return layers_.front().weights.cols(); }
  std::size_t embedding_dim() const { return layers_[layers_.size() - 2].weights.rows(); }
  std::size_t num_outputs() const { return layers_.back().weights.rows(); }
  std::size_t num_hidden() const { return layers_.size() - 1; }
  double dropout_rate() const { return dropout_rate_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  const std::vector<std::string>& subject_labels() const { return subject_labels_; }
  const std::vector<double>& input_mean() const { return input_mean_; }
  const std::vector<double>& input_scale() const { return input_scale_; }
  // [input, hidden..., outputs]
  std::vector<std::size_t> dims() const;

  // (x - mean) * scale, row-wise.
  Matrix NormalizeInputs(const Matrix& inputs) const;
  // Last hidden layer activations (inference mode, no output layer).
  Matrix Embed(const Matrix& inputs) const;
  // Softmax outputs in inference mode.
  Matrix Predict(const Matrix& inputs) const;

 private:
  std::vector<DenseLayer> layers_;
  double dropout_rate_ = 0.0;
  std::vector<std::string> subject_labels_;
  std::vector<double> input_mean_;
  std::vector<double> input_scale_;
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

// Mean categorical cross-entropy over the batch and its exact gradient with
// respect to every weight and bias. `dropout_mask` (B x embedding_dim, entries
// 0 or 1/(1-p)) is applied to the last hidden layer when non-null.
double Backward(const EmbeddingNetwork& network, const Matrix& inputs,
                std::span<const int> labels, const Matrix* dropout_mask,
                Gradients* gradients);

// Loss only, same conventions as Backward.
double Loss(const EmbeddingNetwork& network, const Matrix& inputs,
            std::span<const int> labels, const Matrix* dropout_mask);

struct TrainConfig {
  int epochs = 80;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
  std::uint64_t seed = 0;
  double dropout_rate = 0.15;
  std::vector<int> hidden_dims = {128, 128, 128, 128};
  // Every `center_stride`-th frame is a training observation.
  int center_stride = 1;

  void Validate() const;
};

struct TrainTrace {
  std::vector<double> epoch_loss;      // mean training loss per epoch
  std::vector<double> epoch_accuracy;  // training-mode accuracy per epoch
};

// Subjects are labelled in ascending id order. Inputs are standardized with
// per-coefficient statistics of the development frames.
EmbeddingNetwork TrainNetwork(
    const std::map<std::string, std::vector<FeatureMatrix>>& development,
    const TrainConfig& config, TrainTrace* trace = nullptr);

// Frame-level accuracy in inference mode over every stacked frame.
double ClassificationAccuracy(
    const EmbeddingNetwork& network,
    const std::map<std::string, std::vector<FeatureMatrix>>& data);

enum class EmbeddingLevel { kUtterance, kSubject };

struct SnoreEmbedding {
  std::vector<double> vector;
  EmbeddingLevel level = EmbeddingLevel::kUtterance;
  std::string subject_id;
};

// How per-observation vectors are combined before the final normalization.
// Both give the same direction.
enum class Accumulation { kSum, kMean };

struct EmbeddingConfig {
  int observations = 15;
  int stride = 5;
  Accumulation accumulation = Accumulation::kSum;
};

// Throws kNormalizationDegenerate for a (near-)zero vector.
std::vector<double> L2Normalize(std::span<const double> v);

// Each selected observation is embedded and L2-normalized, the vectors are
// accumulated and the result normalized again. Observations whose hidden
// activation is exactly zero carry no direction and are skipped.
SnoreEmbedding UtteranceEmbedding(const EmbeddingNetwork& network,
                                  const FeatureMatrix& features,
                                  const EmbeddingConfig& config = {});

// Mean of utterance embeddings, L2-normalized.
SnoreEmbedding SubjectEmbedding(std::span<const SnoreEmbedding> utterances,
                                const std::string& subject_id);

nlohmann::json NetworkToJson(const EmbeddingNetwork& network);
EmbeddingNetwork NetworkFromJson(const nlohmann::json& j);
std::string NetworkFingerprint(const EmbeddingNetwork& network);

// Rows `subject_id,e0..e{n-1}`.
void WriteEmbeddingCsv(std::ostream& out, std::span<const SnoreEmbedding> embeddings);

}  // namespace snoreid

#endif  // SNOREID_EMBEDDER_H_
