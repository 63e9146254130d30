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

#ifndef SNOREID_UBM_H_
#define SNOREID_UBM_H_

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "snoreid/dsp.h"
#include "snoreid/gmm.h"

namespace snoreid {

// A mixture trained on pooled development data and used as the prior for
// per-subject MAP adaptation.
struct UbmModel {
  GmmModel gmm;

  // SHA-256 of the serialized mixture; stamped into adapted models.
  std::string Fingerprint() const;
};

// Pools utterances in ascending subject-id order (then utterance order), so
// the result does not depend on how the caller enumerated the subjects.
UbmModel FitUbm(const std::map<std::string, std::vector<FeatureMatrix>>& development,
                const GmmFitConfig& config, GmmFitTrace* trace = nullptr);
UbmModel FitUbm(const Matrix& pooled_frames, const GmmFitConfig& config,
                GmmFitTrace* trace = nullptr);

struct MapConfig {
  double relevance_factor = 16.0;

  void Validate() const;
};

// Means-only MAP adaptation:
//   n_k = sum_t gamma_k(t),  E_k = sum_t gamma_k(t) o_t / n_k,
//   alpha_k = n_k / (n_k + r),  m_k = mu_k + alpha_k (E_k - mu_k).
// E_k falls back to mu_k when n_k < 1e-10. Weights and variances are copied
// from the background model unchanged.
GmmModel MapAdapt(const UbmModel& ubm, const Matrix& subject_frames,
                  const MapConfig& config = {});

nlohmann::json UbmToJson(const UbmModel& ubm);
UbmModel UbmFromJson(const nlohmann::json& j);

}  // namespace snoreid

#endif  // SNOREID_UBM_H_
