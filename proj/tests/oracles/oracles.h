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

#ifndef SNOREID_TESTS_ORACLES_ORACLES_H_
#define SNOREID_TESTS_ORACLES_ORACLES_H_

// Brute-force reference implementations. They share no code with the library
// beyond plain data types and favour directness over speed: direct DFTs,
// per-element loops and long double accumulation.

#include <cstddef>
#include <vector>

#include "snoreid/dsp.h"
#include "snoreid/embedder.h"
#include "snoreid/gmm.h"

namespace snoreid::oracle {

using Rows = std::vector<std::vector<double>>;

// MFCC by definition: Hann window, direct DFT, HTK mel triangles, log with
// floor, orthonormal DCT-II. One row per frame.
Rows Mfcc(const std::vector<double>& samples, const MfccConfig& config);

// Power spectrum |X_k|^2, k = 0..n_fft/2, of a zero-padded frame.
std::vector<long double> DirectPowerSpectrum(const std::vector<long double>& frame, int n_fft);

// log sum_k w_k N(x; mu_k, diag(var_k)).
long double GmmFrameLogLik(const GmmModel& model, const std::vector<double>& x);
long double GmmMeanLogLik(const GmmModel& model, const Rows& frames);
// gamma_k(t), rows = frames.
std::vector<std::vector<long double>> Responsibilities(const GmmModel& model, const Rows& frames);

// Means-only MAP by explicit responsibility sums.
Rows MapMeans(const GmmModel& ubm, const Rows& frames, double relevance);

struct EerResult {
  double eer = 0.0;
  double eer_threshold = 0.0;
  std::vector<double> thresholds;
  std::vector<double> tpr;
  std::vector<double> fpr;
};

// Every candidate threshold (each score and +/-inf), counted one by one.
EerResult ExhaustiveEer(const std::vector<double>& genuine, const std::vector<double>& impostor);

// Forward pass written out element by element; returns last hidden layer.
std::vector<long double> EmbedObservation(const EmbeddingNetwork& net,
                                          const std::vector<double>& stacked);

// Per-observation normalize, sum, normalize, with centers min(stride*i, T-1).
std::vector<double> UtteranceEmbedding(const EmbeddingNetwork& net, const FeatureMatrix& features,
                                       int observations, int stride);

Rows ToRows(const Matrix& m);

}  // namespace snoreid::oracle

#endif  // SNOREID_TESTS_ORACLES_ORACLES_H_
