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

#include "snoreid/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "snoreid/error.h"
#include "snoreid/kernels.h"
#include "snoreid/util.h"

namespace snoreid {

namespace {

constexpr double kDegenerateMass = 1e-8;
constexpr int kModelVersion = 1;

std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(UniformUnit(rng) * n));
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

// D^2 sampling of one row index; uniform when every distance is zero.
std::size_t SampleByDistance(const std::vector<double>& dist, double total, Rng& rng) {
  const std::size_t n = dist.size();
  if (total <= 0.0) return UniformIndex(rng, n);
  const double target = UniformUnit(rng) * total;
  double run = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    run += dist[t];
    if (run > target && dist[t] > 0.0) return t;
  }
  return n - 1;
}

// Greedy k-means++: each step draws 2 + floor(ln k) candidates by D^2
// sampling and keeps the one that lowers the potential most. Returns the row
// indices chosen as initial centers.
std::vector<std::size_t> KMeansPlusPlus(const Matrix& frames, std::size_t k,
                                        Rng& rng) {
  const std::size_t n = frames.rows();
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  std::vector<std::size_t> centers{UniformIndex(rng, n)};
  std::vector<double> dist(n);
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    dist[t] = SquaredDistance(frames.row(t), frames.row(centers[0]));
    total += dist[t];
  }
  std::vector<double> candidate_dist(n), best_dist(n);
  while (centers.size() < k) {
    std::size_t best = n;
    double best_total = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
      const std::size_t pick = SampleByDistance(dist, total, rng);
      auto c = frames.row(pick);
      double candidate_total = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        candidate_dist[t] = std::min(dist[t], SquaredDistance(frames.row(t), c));
        candidate_total += candidate_dist[t];
      }
      if (candidate_total < best_total) {
        best = pick;
        best_total = candidate_total;
        best_dist.swap(candidate_dist);
      }
    }
    centers.push_back(best);
    dist.swap(best_dist);
    total = best_total;
  }
  return centers;
}

Matrix HardAssignment(const Matrix& frames, const std::vector<std::size_t>& centers) {
  Matrix post(frames.rows(), centers.size());
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double d = SquaredDistance(frames.row(t), frames.row(centers[k]));
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    post(t, best) = 1.0;
  }
  return post;
}

struct DataMoments {
  std::vector<double> variance;  // global, per dimension
  std::vector<double> floor;     // variance floor, per dimension
};

DataMoments ComputeMoments(const Matrix& frames, double floor_scale) {
  const std::size_t n = frames.rows(), dim = frames.cols();
  Matrix ones(n, 1, 1.0);
  kernels::MixtureStats stats = kernels::omp::AccumulateMixtureStats(frames, ones);
  Matrix mean(1, dim);
  for (std::size_t d = 0; d < dim; ++d) mean(0, d) = stats.first_order(0, d) / n;
  Matrix dev = kernels::omp::WeightedSquaredDeviation(frames, ones, mean);
  DataMoments m;
  m.variance.resize(dim);
  m.floor.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    m.variance[d] = dev(0, d) / n;
    // A constant dimension has no scale of its own; fall back to unit scale.
    m.floor[d] = m.variance[d] > 0.0 ? floor_scale * m.variance[d] : floor_scale;
  }
  return m;
}

double MeanLogLik(const GmmModel& model, const Matrix& frames) {
  return kernels::omp::Sum(model.FrameLogLikelihoods(frames)) / frames.rows();
}

// Degenerate components are reset to a random frame with the global variance.
// When `previous` is given, the reset is kept only if it does not lower the
// likelihood against plain EM (degenerate components keep their previous
// parameters), which preserves EM monotonicity.
GmmModel MStep(const Matrix& frames, const Matrix& post, const DataMoments& moments,
               const GmmMeta& meta, Rng& rng, const GmmModel* previous, int* resets) {
  const std::size_t n = frames.rows(), k_count = post.cols(), dim = frames.cols();
  kernels::MixtureStats stats = kernels::omp::AccumulateMixtureStats(frames, post);
  std::vector<bool> degenerate(k_count);
  Matrix means(k_count, dim);
  for (std::size_t k = 0; k < k_count; ++k) {
    degenerate[k] = !(stats.occupancy[k] >= kDegenerateMass * n);
    if (degenerate[k]) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      means(k, d) = stats.first_order(k, d) / stats.occupancy[k];
    }
  }
  Matrix dev = kernels::omp::WeightedSquaredDeviation(frames, post, means);
  Matrix vars(k_count, dim);
  std::vector<double> weights(k_count);
  *resets = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (degenerate[k]) {
      ++*resets;
      auto seed_frame = frames.row(UniformIndex(rng, n));
      for (std::size_t d = 0; d < dim; ++d) {
        means(k, d) = seed_frame[d];
        vars(k, d) = std::max(moments.variance[d], moments.floor[d]);
      }
      weights[k] = 1.0 / n;
      continue;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      vars(k, d) = std::max(dev(k, d) / stats.occupancy[k], moments.floor[d]);
    }
    weights[k] = stats.occupancy[k] / n;
  }
  auto normalized = [](std::vector<double> w) {
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    return w;
  };
  GmmModel reset(normalized(weights), means, vars, meta);
  if (previous == nullptr || *resets == 0) return reset;

  for (std::size_t k = 0; k < k_count; ++k) {
    if (!degenerate[k]) continue;
    weights[k] = stats.occupancy[k] / n;
    for (std::size_t d = 0; d < dim; ++d) {
      means(k, d) = previous->means()(k, d);
      vars(k, d) = previous->variances()(k, d);
    }
  }
  GmmModel kept(normalized(weights), std::move(means), std::move(vars), meta);
  if (MeanLogLik(reset, frames) >= MeanLogLik(kept, frames)) return reset;
  *resets = 0;
  return kept;
}

GmmModel FitOnce(const Matrix& frames, const GmmFitConfig& config,
                 const DataMoments& moments, std::uint64_t seed, GmmFitTrace* trace) {
  Rng rng(seed);
  GmmMeta meta;
  meta.training_frame_count = frames.rows();
  meta.seed = seed;

  const auto centers =
      KMeansPlusPlus(frames, static_cast<std::size_t>(config.num_components), rng);
  int resets = 0;
  GmmModel model = MStep(frames, HardAssignment(frames, centers), moments, meta, rng,
                         nullptr, &resets);

  trace->mean_loglik.clear();
  trace->resets.clear();
  trace->converged = false;
  Matrix post;
  double prev = 0.0;
  for (int iter = 0;; ++iter) {
    const std::vector<double> ll = model.Posteriors(frames, &post);
    const double mean = kernels::omp::Sum(ll) / frames.rows();
    trace->mean_loglik.push_back(mean);
    if (iter > 0 && mean - prev < config.rel_tol * std::abs(prev)) {
      trace->converged = true;
      break;
    }
    if (iter == config.max_iters) break;
    meta.iterations = iter + 1;
    model = MStep(frames, post, moments, meta, rng, &model, &resets);
    trace->resets.push_back(resets);
    prev = mean;
  }
  meta.final_mean_loglik = trace->mean_loglik.back();
  return GmmModel(model.weights(), model.means(), model.variances(), meta);
}

}  // namespace

GmmModel::GmmModel(std::vector<double> weights, Matrix means, Matrix variances,
                   GmmMeta meta)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)),
      meta_(std::move(meta)) {
  const std::size_t k_count = weights_.size();
  if (k_count == 0 || means_.rows() != k_count || variances_.rows() != k_count ||
      means_.cols() != variances_.cols() || means_.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent GMM parameter shapes");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative GMM weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "GMM weights do not sum to 1");
  }
  const std::size_t dim = means_.cols();
  inv_variances_ = Matrix(k_count, dim);
  log_consts_.resize(k_count);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < k_count; ++k) {
    double log_det = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = variances_(k, d);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument, "GMM variance must be positive");
      }
      inv_variances_(k, d) = 1.0 / v;
      log_det += std::log(v);
    }
    log_consts_[k] = std::log(weights_[k]) - 0.5 * (dim * log_2pi + log_det);
  }
}

std::vector<double> GmmModel::FrameLogLikelihoods(const Matrix& frames) const {
  return kernels::omp::GmmPosteriors(frames, means_, inv_variances_, log_consts_,
                                     nullptr);
}

std::vector<double> GmmModel::Posteriors(const Matrix& frames, Matrix* posteriors) const {
  return kernels::omp::GmmPosteriors(frames, means_, inv_variances_, log_consts_,
                                     posteriors);
}

void GmmFitConfig::Validate() const {
  if (num_components < 1 || max_iters < 1 || n_init < 1 || rel_tol < 0.0 ||
      !(variance_floor_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid GMM fit config");
  }
}

GmmModel FitGmm(const Matrix& frames, const GmmFitConfig& config, GmmFitTrace* trace) {
  config.Validate();
  if (frames.rows() < static_cast<std::size_t>(config.num_components)) {
    throw Error(ErrorCode::kTooFewFrames,
                std::to_string(frames.rows()) + " frames for " +
                    std::to_string(config.num_components) + " components");
  }
  const DataMoments moments = ComputeMoments(frames, config.variance_floor_scale);
  GmmFitTrace local;
  GmmFitTrace& best_trace = trace ? *trace : local;
  GmmModel best = FitOnce(frames, config, moments, config.seed, &best_trace);
  for (int i = 1; i < config.n_init; ++i) {
    GmmFitTrace t;
    GmmModel candidate = FitOnce(frames, config, moments, DeriveSeed(config.seed, i), &t);
    if (candidate.meta().final_mean_loglik > best.meta().final_mean_loglik) {
      best = std::move(candidate);
      best_trace = std::move(t);
    }
  }
  return best;
}

double Score(const GmmModel& model, const Matrix& frames, ScoreNormalization norm) {
  if (frames.rows() == 0) {
    throw Error(ErrorCode::kEmptyFeatureMatrix, "cannot score an empty feature matrix");
  }
  if (frames.cols() != model.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "feature dimension does not match model");
  }
  const double total = kernels::omp::Sum(model.FrameLogLikelihoods(frames));
  return norm == ScoreNormalization::kSum ? total : total / frames.rows();
}

double Score(const GmmModel& model, const FeatureMatrix& features,
             ScoreNormalization norm) {
  return Score(model, features.frames, norm);
}

Matrix StackFrames(const std::vector<FeatureMatrix>& utterances) {
  Matrix out;
  for (const FeatureMatrix& u : utterances) {
    for (std::size_t t = 0; t < u.num_frames(); ++t) out.AppendRow(u.frames.row(t));
  }
  return out;
}

namespace {

nlohmann::json MatrixToJson(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix MatrixFromJson(const nlohmann::json& j, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) {
    throw Error(ErrorCode::kParseError, "matrix has wrong row count");
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (row.size() != cols) throw Error(ErrorCode::kParseError, "matrix row width");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

}  // namespace

nlohmann::json GmmToJson(const GmmModel& model) {
  nlohmann::json meta = {
      {"training_frame_count", model.meta().training_frame_count},
      {"seed", model.meta().seed},
      {"iterations", model.meta().iterations},
      {"final_mean_loglik", model.meta().final_mean_loglik},
  };
  nlohmann::json j = {
      {"version", kModelVersion},
      {"K", model.num_components()},
      {"dim", model.dim()},
      {"weights", model.weights()},
      {"means", MatrixToJson(model.means())},
      {"variances", MatrixToJson(model.variances())},
      {"meta", meta},
  };
  if (!model.meta().adapted_from.empty()) j["adapted_from"] = model.meta().adapted_from;
  return j;
}

GmmModel GmmFromJson(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::kParseError, "unsupported GMM model version");
    }
    const auto k = j.at("K").get<std::size_t>();
    const auto dim = j.at("dim").get<std::size_t>();
    GmmMeta meta;
    const auto& m = j.at("meta");
    meta.training_frame_count = m.at("training_frame_count").get<std::size_t>();
    meta.seed = m.at("seed").get<std::uint64_t>();
    meta.iterations = m.at("iterations").get<int>();
    meta.final_mean_loglik = m.at("final_mean_loglik").get<double>();
    if (j.contains("adapted_from")) meta.adapted_from = j["adapted_from"].get<std::string>();
    return GmmModel(j.at("weights").get<std::vector<double>>(),
                    MatrixFromJson(j.at("means"), k, dim),
                    MatrixFromJson(j.at("variances"), k, dim), meta);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("GMM JSON: ") + e.what());
  }
}

}  // namespace snoreid
