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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "snoreid/error.h"
#include "snoreid/kernels.h"
#include "snoreid/util.h"

namespace snoreid {

namespace {

constexpr int kNetworkVersion = 1;
constexpr double kDegenerateNorm = 1e-12;

void ReluInPlace(Matrix* m) {
  for (double& v : m->data()) v = v > 0.0 ? v : 0.0;
}

void SoftmaxRowsInPlace(Matrix* m) {
  for (std::size_t r = 0; r < m->rows(); ++r) {
    auto row = m->row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
}

struct ForwardCache {
  // activations[0] is the normalized input, activations[l] the post-ReLU
  // output of hidden layer l.
  std::vector<Matrix> activations;
  Matrix dropped;  // last hidden layer after the dropout mask
  Matrix probs;
};

ForwardCache ForwardTrain(const EmbeddingNetwork& net, const Matrix& inputs,
                          const Matrix* dropout_mask) {
  ForwardCache cache;
  cache.activations.push_back(net.NormalizeInputs(inputs));
  const auto& layers = net.layers();
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Matrix z = kernels::omp::DenseForward(cache.activations.back(), layers[l].weights,
                                          layers[l].bias);
    ReluInPlace(&z);
    cache.activations.push_back(std::move(z));
  }
  cache.dropped = cache.activations.back();
  if (dropout_mask) {
    for (std::size_t i = 0; i < cache.dropped.data().size(); ++i) {
      cache.dropped.data()[i] *= dropout_mask->data()[i];
    }
  }
  cache.probs = kernels::omp::DenseForward(cache.dropped, layers.back().weights,
                                           layers.back().bias);
  SoftmaxRowsInPlace(&cache.probs);
  return cache;
}

double CrossEntropy(const Matrix& probs, std::span<const int> labels) {
  double loss = 0.0;
  for (std::size_t b = 0; b < probs.rows(); ++b) {
    loss -= std::log(std::max(probs(b, labels[b]), 1e-300));
  }
  return loss / probs.rows();
}

void CheckBatch(const EmbeddingNetwork& net, const Matrix& inputs,
                std::span<const int> labels, const Matrix* mask) {
  if (inputs.rows() == 0 || inputs.rows() != labels.size() ||
      inputs.cols() != net.input_dim()) {
    throw Error(ErrorCode::kInvalidArgument, "batch shape does not match network");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= net.num_outputs()) {
      throw Error(ErrorCode::kInvalidArgument, "label out of range");
    }
  }
  if (mask && (mask->rows() != inputs.rows() || mask->cols() != net.embedding_dim())) {
    throw Error(ErrorCode::kInvalidArgument, "dropout mask shape mismatch");
  }
}

std::vector<double> ColumnSums(const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
  return out;
}

// One training observation: utterance index and center frame.
struct Observation {
  std::size_t utterance;
  std::size_t center;
};

std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(UniformUnit(rng) * n));
}

class Adam {
 public:
  Adam(const EmbeddingNetwork& net, const TrainConfig& config) : config_(config) {
    for (const DenseLayer& layer : net.layers()) {
      m_w_.emplace_back(layer.weights.rows(), layer.weights.cols());
      v_w_.emplace_back(layer.weights.rows(), layer.weights.cols());
      m_b_.emplace_back(layer.bias.size(), 0.0);
      v_b_.emplace_back(layer.bias.size(), 0.0);
    }
  }

  void Step(const Gradients& g, EmbeddingNetwork* net) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, t_);
    const double c2 = 1.0 - std::pow(config_.beta2, t_);
    auto& layers = net->mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      Update(g.weights[l].data(), &m_w_[l].data(), &v_w_[l].data(),
             &layers[l].weights.data(), c1, c2);
      Update(g.biases[l], &m_b_[l], &v_b_[l], &layers[l].bias, c1, c2);
    }
  }

 private:
  void Update(const std::vector<double>& grad, std::vector<double>* m,
              std::vector<double>* v, std::vector<double>* param, double c1,
              double c2) const {
    const double b1 = config_.beta1, b2 = config_.beta2;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      (*m)[i] = b1 * (*m)[i] + (1.0 - b1) * grad[i];
      (*v)[i] = b2 * (*v)[i] + (1.0 - b2) * grad[i] * grad[i];
      const double m_hat = (*m)[i] / c1;
      const double v_hat = (*v)[i] / c2;
      (*param)[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }

  TrainConfig config_;
  int t_ = 0;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<std::vector<double>> m_b_, v_b_;
};

}  // namespace

EmbeddingNetwork::EmbeddingNetwork(std::vector<DenseLayer> layers, double dropout_rate,
                                   std::vector<std::string> subject_labels,
                                   std::vector<double> input_mean,
                                   std::vector<double> input_scale)
    : layers_(std::move(layers)),
      dropout_rate_(dropout_rate),
      subject_labels_(std::move(subject_labels)),
      input_mean_(std::move(input_mean)),
      input_scale_(std::move(input_scale)) {
  if (layers_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "network needs a hidden and an output layer");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.bias.size() != layer.weights.rows() ||
        (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows())) {
      throw Error(ErrorCode::kInvalidArgument, "layer shapes do not chain");
    }
  }
  if (subject_labels_.size() != num_outputs()) {
    throw Error(ErrorCode::kInvalidArgument, "one subject label per output required");
  }
  if (input_mean_.size() != input_dim() || input_scale_.size() != input_dim()) {
    throw Error(ErrorCode::kInvalidArgument, "input normalization has wrong size");
  }
  if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout rate must be in [0, 1)");
  }
}

EmbeddingNetwork EmbeddingNetwork::Initialize(std::size_t input_dim,
                                              const std::vector<int>& hidden_dims,
                                              std::vector<std::string> subject_labels,
                                              double dropout_rate, std::uint64_t seed) {
  if (hidden_dims.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one hidden layer required");
  }
  Rng rng(seed);
  std::vector<std::size_t> dims{input_dim};
  for (int h : hidden_dims) dims.push_back(static_cast<std::size_t>(h));
  dims.push_back(subject_labels.size());
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer{Matrix(dims[l + 1], dims[l]), std::vector<double>(dims[l + 1], 0.0)};
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[l]));
    for (double& w : layer.weights.data()) w = (2.0 * UniformUnit(rng) - 1.0) * limit;
    layers.push_back(std::move(layer));
  }
  return EmbeddingNetwork(std::move(layers), dropout_rate, std::move(subject_labels),
                          std::vector<double>(input_dim, 0.0),
                          std::vector<double>(input_dim, 1.0));
}

std::vector<std::size_t> EmbeddingNetwork::dims() const {
  std::vector<std::size_t> out{input_dim()};
  for (const DenseLayer& layer : layers_) out.push_back(layer.weights.rows());
  return out;
}

Matrix EmbeddingNetwork::NormalizeInputs(const Matrix& inputs) const {
  if (inputs.cols() != input_dim()) {
    throw Error(ErrorCode::kInvalidArgument, "input dimension does not match network");
  }
  Matrix out = inputs;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = (row[c] - input_mean_[c]) * input_scale_[c];
    }
  }
  return out;
}

Matrix EmbeddingNetwork::Embed(const Matrix& inputs) const {
  Matrix a = NormalizeInputs(inputs);
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    a = kernels::omp::DenseForward(a, layers_[l].weights, layers_[l].bias);
    ReluInPlace(&a);
  }
  return a;
}

Matrix EmbeddingNetwork::Predict(const Matrix& inputs) const {
  Matrix probs = kernels::omp::DenseForward(Embed(inputs), layers_.back().weights,
                                            layers_.back().bias);
  SoftmaxRowsInPlace(&probs);
  return probs;
}

double Loss(const EmbeddingNetwork& network, const Matrix& inputs,
            std::span<const int> labels, const Matrix* dropout_mask) {
  CheckBatch(network, inputs, labels, dropout_mask);
  return CrossEntropy(ForwardTrain(network, inputs, dropout_mask).probs, labels);
}

namespace {

double BackwardImpl(const EmbeddingNetwork& network, const Matrix& inputs,
                    std::span<const int> labels, const Matrix* dropout_mask,
                    Gradients* gradients, Matrix* probs_out) {
  CheckBatch(network, inputs, labels, dropout_mask);
  const ForwardCache cache = ForwardTrain(network, inputs, dropout_mask);
  const double loss = CrossEntropy(cache.probs, labels);
  if (probs_out) *probs_out = cache.probs;
  const auto& layers = network.layers();
  const std::size_t num_layers = layers.size();
  const double inv_batch = 1.0 / static_cast<double>(inputs.rows());

  gradients->weights.assign(num_layers, Matrix());
  gradients->biases.assign(num_layers, {});

  // d loss / d logits = (p - onehot) / B
  Matrix delta = cache.probs;
  for (std::size_t b = 0; b < delta.rows(); ++b) {
    delta(b, labels[b]) -= 1.0;
    for (double& v : delta.row(b)) v *= inv_batch;
  }
  gradients->weights[num_layers - 1] = kernels::omp::DenseWeightGrad(delta, cache.dropped);
  gradients->biases[num_layers - 1] = ColumnSums(delta);

  delta = kernels::omp::DenseInputGrad(delta, layers.back().weights);
  if (dropout_mask) {
    for (std::size_t i = 0; i < delta.data().size(); ++i) {
      delta.data()[i] *= dropout_mask->data()[i];
    }
  }
  for (std::size_t l = num_layers - 1; l-- > 0;) {
    const Matrix& out = cache.activations[l + 1];
    for (std::size_t i = 0; i < delta.data().size(); ++i) {
      if (!(out.data()[i] > 0.0)) delta.data()[i] = 0.0;
    }
    gradients->weights[l] = kernels::omp::DenseWeightGrad(delta, cache.activations[l]);
    gradients->biases[l] = ColumnSums(delta);
    if (l > 0) delta = kernels::omp::DenseInputGrad(delta, layers[l].weights);
  }
  return loss;
}

}  // namespace

double Backward(const EmbeddingNetwork& network, const Matrix& inputs,
                std::span<const int> labels, const Matrix* dropout_mask,
                Gradients* gradients) {
  return BackwardImpl(network, inputs, labels, dropout_mask, gradients, nullptr);
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (center_stride < 1) throw Error(ErrorCode::kInvalidArgument, "center_stride must be >= 1");
  if (!(learning_rate > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) ||
      !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0) ||
      !(dropout_rate >= 0.0 && dropout_rate < 1.0) || hidden_dims.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training config");
  }
  for (int h : hidden_dims) {
    if (h < 1) throw Error(ErrorCode::kInvalidArgument, "hidden layer width must be >= 1");
  }
}

EmbeddingNetwork TrainNetwork(
    const std::map<std::string, std::vector<FeatureMatrix>>& development,
    const TrainConfig& config, TrainTrace* trace) {
  config.Validate();
  if (development.size() < 2) {
    throw Error(ErrorCode::kTooFewSubjects, "need at least 2 development subjects");
  }
  std::vector<std::string> labels;
  std::vector<const FeatureMatrix*> utterances;
  std::vector<int> utterance_label;
  for (const auto& [subject, list] : development) {
    labels.push_back(subject);
    for (const FeatureMatrix& f : list) {
      if (f.empty()) continue;
      utterances.push_back(&f);
      utterance_label.push_back(static_cast<int>(labels.size() - 1));
    }
  }
  std::vector<Observation> observations;
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    for (std::size_t t = 0; t < utterances[u]->num_frames(); t += config.center_stride) {
      observations.push_back({u, t});
    }
  }
  if (observations.empty()) {
    throw Error(ErrorCode::kEmptyDevelopmentSet, "development set has no frames");
  }

  // Per-coefficient standardization from the development frames, tiled over
  // the context window.
  const std::size_t dim = utterances.front()->dim();
  Matrix ones;
  Matrix all_frames;
  for (const FeatureMatrix* f : utterances) {
    if (f->dim() != dim) throw Error(ErrorCode::kInvalidArgument, "mixed feature dims");
    for (std::size_t t = 0; t < f->num_frames(); ++t) all_frames.AppendRow(f->frames.row(t));
  }
  ones = Matrix(all_frames.rows(), 1, 1.0);
  const auto stats = kernels::omp::AccumulateMixtureStats(all_frames, ones);
  Matrix mean(1, dim);
  for (std::size_t d = 0; d < dim; ++d) mean(0, d) = stats.first_order(0, d) / all_frames.rows();
  const Matrix dev = kernels::omp::WeightedSquaredDeviation(all_frames, ones, mean);
  std::vector<double> in_mean, in_scale;
  for (int c = 0; c < kContextFrames; ++c) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(dev(0, d) / all_frames.rows());
      in_mean.push_back(mean(0, d));
      in_scale.push_back(sd > 0.0 ? 1.0 / sd : 1.0);
    }
  }

  const std::size_t input_dim = kContextFrames * dim;
  EmbeddingNetwork init = EmbeddingNetwork::Initialize(
      input_dim, config.hidden_dims, labels, config.dropout_rate, DeriveSeed(config.seed, 0));
  EmbeddingNetwork net(init.layers(), config.dropout_rate, labels, in_mean, in_scale);

  Adam adam(net, config);
  std::vector<std::size_t> order(observations.size());
  const std::size_t hidden = net.embedding_dim();
  const double keep_scale = 1.0 / (1.0 - config.dropout_rate);
  if (trace) *trace = {};

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(DeriveSeed(config.seed, 1 + 2 * static_cast<std::uint64_t>(epoch)));
    Rng dropout_rng(DeriveSeed(config.seed, 2 + 2 * static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[UniformIndex(shuffle_rng, i)]);
    }
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::size_t batch = end - start;
      Matrix x(batch, input_dim);
      std::vector<int> y(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        const Observation& obs = observations[order[start + b]];
        const StackedFeature s = StackContext(*utterances[obs.utterance], obs.center);
        std::copy(s.vector.begin(), s.vector.end(), x.row(b).begin());
        y[b] = utterance_label[obs.utterance];
      }
      Matrix mask(batch, hidden, 1.0);
      if (config.dropout_rate > 0.0) {
        for (double& m : mask.data()) {
          m = UniformUnit(dropout_rng) < config.dropout_rate ? 0.0 : keep_scale;
        }
      }
      Gradients grads;
      Matrix probs;
      const double loss = BackwardImpl(net, x, y, &mask, &grads, trace ? &probs : nullptr);
      loss_sum += loss * batch;
      if (trace) {
        for (std::size_t b = 0; b < batch; ++b) {
          auto row = probs.row(b);
          if (std::max_element(row.begin(), row.end()) - row.begin() == y[b]) ++correct;
        }
      }
      adam.Step(grads, &net);
    }
    if (trace) {
      trace->epoch_loss.push_back(loss_sum / order.size());
      trace->epoch_accuracy.push_back(static_cast<double>(correct) / order.size());
    }
  }
  return net;
}

double ClassificationAccuracy(
    const EmbeddingNetwork& network,
    const std::map<std::string, std::vector<FeatureMatrix>>& data) {
  const auto& labels = network.subject_labels();
  std::size_t correct = 0, total = 0;
  for (const auto& [subject, list] : data) {
    const auto it = std::find(labels.begin(), labels.end(), subject);
    if (it == labels.end()) throw Error(ErrorCode::kUnknownSubject, subject);
    const auto label = static_cast<std::size_t>(it - labels.begin());
    for (const FeatureMatrix& f : list) {
      if (f.empty()) continue;
      Matrix x(f.num_frames(), network.input_dim());
      for (std::size_t t = 0; t < f.num_frames(); ++t) {
        const StackedFeature s = StackContext(f, t);
        std::copy(s.vector.begin(), s.vector.end(), x.row(t).begin());
      }
      const Matrix probs = network.Predict(x);
      for (std::size_t t = 0; t < probs.rows(); ++t) {
        auto row = probs.row(t);
        if (static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) ==
            label) {
          ++correct;
        }
      }
      total += probs.rows();
    }
  }
  if (total == 0) throw Error(ErrorCode::kEmptyInput, "no frames to classify");
  return static_cast<double>(correct) / total;
}

std::vector<double> L2Normalize(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > kDegenerateNorm) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kNormalizationDegenerate, "cannot normalize a zero vector");
  }
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

SnoreEmbedding UtteranceEmbedding(const EmbeddingNetwork& network,
                                  const FeatureMatrix& features,
                                  const EmbeddingConfig& config) {
  if (features.empty()) {
    throw Error(ErrorCode::kEmptyFeatureMatrix, "cannot embed an empty utterance");
  }
  const std::vector<StackedFeature> obs =
      SelectObservations(features, config.observations, config.stride);
  Matrix x(obs.size(), network.input_dim());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::copy(obs[i].vector.begin(), obs[i].vector.end(), x.row(i).begin());
  }
  const Matrix hidden = network.Embed(x);
  std::vector<double> acc(hidden.cols(), 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < hidden.rows(); ++i) {
    auto row = hidden.row(i);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) continue;
    const std::vector<double> unit = L2Normalize(row);
    for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += unit[d];
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::kNormalizationDegenerate,
                "every observation has a zero embedding");
  }
  if (config.accumulation == Accumulation::kMean) {
    for (double& v : acc) v /= static_cast<double>(used);
  }
  return {L2Normalize(acc), EmbeddingLevel::kUtterance, ""};
}

SnoreEmbedding SubjectEmbedding(std::span<const SnoreEmbedding> utterances,
                                const std::string& subject_id) {
  if (utterances.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no utterance embeddings for " + subject_id);
  }
  const std::size_t dim = utterances.front().vector.size();
  std::vector<double> mean(dim, 0.0);
  for (const SnoreEmbedding& e : utterances) {
    if (e.vector.size() != dim) throw Error(ErrorCode::kInvalidArgument, "mixed embedding dims");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += e.vector[d];
  }
  for (double& v : mean) v /= static_cast<double>(utterances.size());
  return {L2Normalize(mean), EmbeddingLevel::kSubject, subject_id};
}

nlohmann::json NetworkToJson(const EmbeddingNetwork& network) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const DenseLayer& layer : network.layers()) {
    weights.push_back(layer.weights.data());
    biases.push_back(layer.bias);
  }
  return {
      {"version", kNetworkVersion},
      {"dims", network.dims()},
      {"weights", weights},
      {"biases", biases},
      {"dropout_rate", network.dropout_rate()},
      {"subject_label_order", network.subject_labels()},
      {"input_mean", network.input_mean()},
      {"input_scale", network.input_scale()},
  };
}

EmbeddingNetwork NetworkFromJson(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kNetworkVersion) {
      throw Error(ErrorCode::kParseError, "unsupported network version");
    }
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (dims.size() < 3 || weights.size() != dims.size() - 1 ||
        biases.size() != dims.size() - 1) {
      throw Error(ErrorCode::kParseError, "network layer count mismatch");
    }
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      DenseLayer layer{Matrix(dims[l + 1], dims[l]), biases[l].get<std::vector<double>>()};
      auto flat = weights[l].get<std::vector<double>>();
      if (flat.size() != dims[l + 1] * dims[l]) {
        throw Error(ErrorCode::kParseError, "weight matrix size mismatch");
      }
      layer.weights.data() = std::move(flat);
      layers.push_back(std::move(layer));
    }
    return EmbeddingNetwork(std::move(layers), j.at("dropout_rate").get<double>(),
                            j.at("subject_label_order").get<std::vector<std::string>>(),
                            j.at("input_mean").get<std::vector<double>>(),
                            j.at("input_scale").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("network JSON: ") + e.what());
  }
}

std::string NetworkFingerprint(const EmbeddingNetwork& network) {
  return Sha256Hex(NetworkToJson(network).dump());
}

void WriteEmbeddingCsv(std::ostream& out, std::span<const SnoreEmbedding> embeddings) {
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().vector.size();
  out << "subject_id";
  for (std::size_t d = 0; d < dim; ++d) out << ",e" << d;
  out << '\n';
  char buf[32];
  for (const SnoreEmbedding& e : embeddings) {
    out << e.subject_id;
    for (double v : e.vector) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace snoreid
