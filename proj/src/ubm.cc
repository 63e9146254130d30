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

#include "snoreid/ubm.h"

#include "snoreid/error.h"
#include "snoreid/kernels.h"
#include "snoreid/util.h"

namespace snoreid {

namespace {
constexpr double kMinOccupancy = 1e-10;
}  // namespace

std::string UbmModel::Fingerprint() const { return Sha256Hex(GmmToJson(gmm).dump()); }

UbmModel FitUbm(const std::map<std::string, std::vector<FeatureMatrix>>& development,
                const GmmFitConfig& config, GmmFitTrace* trace) {
  Matrix pooled;
  for (const auto& [subject, utterances] : development) {
    for (const FeatureMatrix& u : utterances) {
      for (std::size_t t = 0; t < u.num_frames(); ++t) pooled.AppendRow(u.frames.row(t));
    }
  }
  return FitUbm(pooled, config, trace);
}

UbmModel FitUbm(const Matrix& pooled_frames, const GmmFitConfig& config,
                GmmFitTrace* trace) {
  return UbmModel{FitGmm(pooled_frames, config, trace)};
}

void MapConfig::Validate() const {
  if (!(relevance_factor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "relevance factor must be positive");
  }
}

GmmModel MapAdapt(const UbmModel& ubm, const Matrix& subject_frames,
                  const MapConfig& config) {
  config.Validate();
  if (subject_frames.rows() == 0) {
    throw Error(ErrorCode::kEmptyFeatureMatrix, "no frames to adapt to");
  }
  const GmmModel& prior = ubm.gmm;
  if (subject_frames.cols() != prior.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "feature dimension does not match UBM");
  }
  Matrix post;
  prior.Posteriors(subject_frames, &post);
  const kernels::MixtureStats stats =
      kernels::omp::AccumulateMixtureStats(subject_frames, post);

  Matrix means = prior.means();
  for (std::size_t k = 0; k < prior.num_components(); ++k) {
    const double n = stats.occupancy[k];
    if (n < kMinOccupancy) continue;
    const double alpha = n / (n + config.relevance_factor);
    for (std::size_t d = 0; d < prior.dim(); ++d) {
      const double expected = stats.first_order(k, d) / n;
      means(k, d) = prior.means()(k, d) + alpha * (expected - prior.means()(k, d));
    }
  }
  GmmMeta meta = prior.meta();
  meta.training_frame_count = subject_frames.rows();
  meta.iterations = 0;
  meta.final_mean_loglik = 0.0;
  meta.adapted_from = ubm.Fingerprint();
  return GmmModel(prior.weights(), std::move(means), prior.variances(), meta);
}

nlohmann::json UbmToJson(const UbmModel& ubm) {
  nlohmann::json j = GmmToJson(ubm.gmm);
  j["role"] = "background";
  return j;
}

UbmModel UbmFromJson(const nlohmann::json& j) {
  if (j.value("role", "") != "background") {
    throw Error(ErrorCode::kParseError, "model is not tagged as a background model");
  }
  nlohmann::json body = j;
  body.erase("role");
  return UbmModel{GmmFromJson(body)};
}

}  // namespace snoreid
