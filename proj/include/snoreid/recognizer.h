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

#ifndef SNOREID_RECOGNIZER_H_
#define SNOREID_RECOGNIZER_H_

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "snoreid/dsp.h"
#include "snoreid/embedder.h"
#include "snoreid/gmm.h"
#include "snoreid/ubm.h"

namespace snoreid {

enum class Backend { kGmm, kGmmUbm, kDnn };

std::string BackendName(Backend backend);
Backend ParseBackend(const std::string& name);

using SubjectFeatures = std::map<std::string, std::vector<FeatureMatrix>>;

// Enrolled subjects for one backend. GMM backends hold one mixture per
// subject (the UBM is kept for gmm-ubm); the dnn backend holds one
// subject-level embedding per subject plus the network that produced them.
struct Registry {
  Backend backend = Backend::kGmm;
  std::vector<std::string> subjects;
  std::vector<GmmModel> models;
  std::vector<SnoreEmbedding> embeddings;
  std::optional<UbmModel> ubm;
  std::optional<EmbeddingNetwork> network;
  std::string feature_fingerprint;
  ScoreNormalization score_normalization = ScoreNormalization::kFrameAverage;
  // gmm-ubm only: score as log p(X | subject) - log p(X | UBM). The UBM term
  // is shared by every subject for a given test, so identification is
  // unaffected; verification thresholds become comparable across tests.
  bool ubm_ratio = true;
  EmbeddingConfig embedding_config;

  std::size_t size() const { return subjects.size(); }
  // Index of `subject`, or throws kUnknownSubject.
  std::size_t IndexOf(const std::string& subject) const;
  void Validate() const;
};

// Per-subject fits; every subject uses `config` (same seed).
Registry EnrollGmm(const SubjectFeatures& enroll, const GmmFitConfig& config,
                   const std::string& feature_fingerprint);
Registry EnrollGmmUbm(const UbmModel& ubm, const SubjectFeatures& enroll,
                      const MapConfig& config, const std::string& feature_fingerprint);
Registry EnrollDnn(const EmbeddingNetwork& network, const SubjectFeatures& enroll,
                   const EmbeddingConfig& config, const std::string& feature_fingerprint);

// Backend score of one utterance against every enrolled subject, in registry
// order: average log-likelihood (gmm; gmm-ubm with ubm_ratio off), average
// log-likelihood ratio against the UBM (gmm-ubm) or cosine similarity (dnn).
std::vector<double> ScoreAll(const Registry& registry, const FeatureMatrix& test);

struct Identification {
  std::string subject_id;
  std::size_t index = 0;
  std::vector<double> scores;
};

// Argmax over ScoreAll; ties go to the earliest subject in registry order.
Identification Identify(const Registry& registry, const FeatureMatrix& test);

struct Verification {
  bool accept = false;
  double score = 0.0;
};

// Accepts iff the claimed subject's score >= threshold.
Verification Verify(const Registry& registry, const std::string& claimed,
                    const FeatureMatrix& test, double threshold);

// Dot product of unit vectors; throws kNonUnitInput when either norm is off
// by more than 1e-6.
double CosineSimilarity(const SnoreEmbedding& a, const SnoreEmbedding& b);

// Rows are test utterances, columns enrolled subjects.
struct ScoreMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Matrix values;
};

using LabelledFeatures = std::vector<std::pair<std::string, FeatureMatrix>>;

ScoreMatrix BuildScoreMatrix(const Registry& registry, const LabelledFeatures& tests);

struct RocPoint {
  double threshold;  // +/-infinity for the sentinels
  double tpr;
  double fpr;
};

struct OperatingPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
};

struct VerificationMetrics {
  std::vector<RocPoint> roc;  // ascending threshold
  double eer = 0.0;
  double eer_threshold = 0.0;
};

// Thresholds sweep the sorted distinct scores plus -inf/+inf. TPR and FPR
// count scores >= threshold. The EER is where FPR equals FNR, interpolated
// linearly between the two bracketing thresholds.
VerificationMetrics RocAndEer(std::vector<double> genuine, std::vector<double> impostor);

// Pooled TPR/TNR at `threshold`.
OperatingPoint OperatingPointAt(const std::vector<double>& genuine,
                                const std::vector<double>& impostor, double threshold);

struct EvalOptions {
  std::optional<double> threshold;
  // Average TPR/TNR over claimed subjects instead of pooling trials.
  bool per_subject_average = false;
};

struct EvalReport {
  std::string backend;
  std::size_t num_tests = 0;
  double identification_accuracy = 0.0;
  std::size_t num_genuine = 0;
  std::size_t num_impostor = 0;
  std::vector<RocPoint> roc;
  double eer = 0.0;
  double eer_threshold = 0.0;
  OperatingPoint at_eer;
  std::optional<OperatingPoint> operating_point;
  bool per_subject_average = false;
};

struct Evaluation {
  EvalReport report;
  ScoreMatrix scores;
};

// Scores every test against every subject. Identification is the row argmax;
// verification trials are all cells, genuine where the row and column labels
// agree.
Evaluation Evaluate(const Registry& registry, const LabelledFeatures& tests,
                    const EvalOptions& options = {});

nlohmann::json RegistryToJson(const Registry& registry);
Registry RegistryFromJson(const nlohmann::json& j);
nlohmann::json EvalReportToJson(const EvalReport& report);

void WriteScoreMatrixCsv(std::ostream& out, const ScoreMatrix& matrix);
void WriteRocCsv(std::ostream& out, const std::vector<RocPoint>& roc);

}  // namespace snoreid

#endif  // SNOREID_RECOGNIZER_H_
