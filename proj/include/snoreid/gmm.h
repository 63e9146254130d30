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

#ifndef SNOREID_GMM_H_
#define SNOREID_GMM_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "snoreid/dsp.h"
#include "snoreid/matrix.h"

namespace snoreid {

struct GmmMeta {
  std::size_t training_frame_count = 0;
  std::uint64_t seed = 0;
  int iterations = 0;
  double final_mean_loglik = 0.0;
  // Fingerprint of the background model for MAP-adapted models, else empty.
  std::string adapted_from;
};

// Diagonal-covariance Gaussian mixture. Immutable once built; the constructor
// validates the parameters and precomputes the per-component constants used
// for scoring.
class GmmModel {
 public:
  GmmModel(std::vector<double> weights, Matrix means, Matrix variances,
           GmmMeta meta = {});

  std::size_t num_components() const { return weights_.size(); }
  std::size_t dim() const { return means_.cols(); }
  const std::vector<double>& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const Matrix& variances() const { return variances_; }
  const GmmMeta& meta() const { return meta_; }

  const Matrix& inv_variances() const { return inv_variances_; }
  const std::vector<double>& log_consts() const { return log_consts_; }

  // log p(o_t) for every row.
  std::vector<double> FrameLogLikelihoods(const Matrix& frames) const;
  // Fills `posteriors` (T x K) and returns per-frame log p(o_t).
  std::vector<double> Posteriors(const Matrix& frames, Matrix* posteriors) const;

 private:
  std::vector<double> weights_;
  Matrix means_;
  Matrix variances_;
  GmmMeta meta_;
  Matrix inv_variances_;
  std::vector<double> log_consts_;
};

struct GmmFitConfig {
  int num_components = 10;
  int max_iters = 200;
  double rel_tol = 1e-6;
  // Per-dimension floor = variance_floor_scale * global variance of the data.
  double variance_floor_scale = 1e-4;
  std::uint64_t seed = 0;
  int n_init = 1;

  void Validate() const;
};

// Per-run diagnostics of FitGmm.
struct GmmFitTrace {
  // Mean log-likelihood at the start of every iteration and after the final
  // M-step (one more entry than M-steps performed).
  std::vector<double> mean_loglik;
  // Degenerate-component resets performed in each M-step.
  std::vector<int> resets;
  bool converged = false;
};

// EM from a k-means++ start followed by one hard-assignment M-step. Stops when
// the relative gain in mean log-likelihood drops below rel_tol or after
// max_iters M-steps. A component whose responsibility mass falls below
// 1e-8 * T is re-seeded at a random training frame with the global variance.
// With n_init > 1 the run with the highest final likelihood wins.
GmmModel FitGmm(const Matrix& frames, const GmmFitConfig& config,
                GmmFitTrace* trace = nullptr);

enum class ScoreNormalization { kFrameAverage, kSum };

// (1/T) sum_t log sum_k w_k N(o_t; mu_k, var_k), or the plain sum.
double Score(const GmmModel& model, const Matrix& frames,
             ScoreNormalization norm = ScoreNormalization::kFrameAverage);
double Score(const GmmModel& model, const FeatureMatrix& features,
             ScoreNormalization norm = ScoreNormalization::kFrameAverage);

// Stacks the rows of several utterances into one matrix.
Matrix StackFrames(const std::vector<FeatureMatrix>& utterances);

nlohmann::json GmmToJson(const GmmModel& model);
GmmModel GmmFromJson(const nlohmann::json& j);

}  // namespace snoreid

#endif  // SNOREID_GMM_H_
