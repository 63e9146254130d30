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

#include "snoreid/recognizer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "parallel.h"
#include "snoreid/error.h"
#include "snoreid/kernels.h"

namespace snoreid {

namespace {

constexpr int kRegistryVersion = 1;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> Keys(const SubjectFeatures& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

void CheckEnroll(const SubjectFeatures& enroll) {
  if (enroll.empty()) throw Error(ErrorCode::kEmptyRegistry, "nothing to enroll");
  for (const auto& [subject, list] : enroll) {
    if (list.empty()) throw Error(ErrorCode::kEmptyInput, "no enrollment data for " + subject);
  }
}

std::size_t ArgMax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::size_t CountAtLeast(const std::vector<double>& sorted, double threshold) {
  return sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), threshold);
}

std::string FormatThreshold(double t) {
  if (t == kInf) return "inf";
  if (t == -kInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", t);
  return buf;
}

nlohmann::json ThresholdToJson(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

nlohmann::json OperatingPointToJson(const OperatingPoint& p) {
  return {{"threshold", ThresholdToJson(p.threshold)}, {"tpr", p.tpr}, {"tnr", p.tnr}};
}

// TPR/TNR averaged over claimed subjects (columns).
OperatingPoint PerSubjectOperatingPoint(const ScoreMatrix& m, double threshold) {
  double tpr_sum = 0.0, tnr_sum = 0.0;
  std::size_t tpr_n = 0, tnr_n = 0;
  for (std::size_t c = 0; c < m.col_labels.size(); ++c) {
    std::size_t g = 0, g_acc = 0, i = 0, i_rej = 0;
    for (std::size_t r = 0; r < m.row_labels.size(); ++r) {
      const bool accept = m.values(r, c) >= threshold;
      if (m.row_labels[r] == m.col_labels[c]) {
        ++g;
        g_acc += accept;
      } else {
        ++i;
        i_rej += !accept;
      }
    }
    if (g) {
      tpr_sum += static_cast<double>(g_acc) / g;
      ++tpr_n;
    }
    if (i) {
      tnr_sum += static_cast<double>(i_rej) / i;
      ++tnr_n;
    }
  }
  return {threshold, tpr_n ? tpr_sum / tpr_n : 0.0, tnr_n ? tnr_sum / tnr_n : 0.0};
}

}  // namespace

std::string BackendName(Backend backend) {
  switch (backend) {
    case Backend::kGmm: return "gmm";
    case Backend::kGmmUbm: return "gmm-ubm";
    case Backend::kDnn: return "dnn";
  }
  return "unknown";
}

Backend ParseBackend(const std::string& name) {
  if (name == "gmm") return Backend::kGmm;
  if (name == "gmm-ubm") return Backend::kGmmUbm;
  if (name == "dnn") return Backend::kDnn;
  throw Error(ErrorCode::kInvalidArgument, "unknown backend '" + name + "'");
}

std::size_t Registry::IndexOf(const std::string& subject) const {
  const auto it = std::find(subjects.begin(), subjects.end(), subject);
  if (it == subjects.end()) throw Error(ErrorCode::kUnknownSubject, subject);
  return static_cast<std::size_t>(it - subjects.begin());
}

void Registry::Validate() const {
  if (subjects.empty()) throw Error(ErrorCode::kEmptyRegistry, "registry has no subjects");
  const bool gmm = backend != Backend::kDnn;
  if (gmm && models.size() != subjects.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one model per subject required");
  }
  if (!gmm && (embeddings.size() != subjects.size() || !network)) {
    throw Error(ErrorCode::kInvalidArgument, "dnn registry needs embeddings and a network");
  }
  if (backend == Backend::kGmmUbm && !ubm) {
    throw Error(ErrorCode::kInvalidArgument, "gmm-ubm registry needs its UBM");
  }
}

Registry EnrollGmm(const SubjectFeatures& enroll, const GmmFitConfig& config,
                   const std::string& feature_fingerprint) {
  CheckEnroll(enroll);
  Registry reg;
  reg.backend = Backend::kGmm;
  reg.subjects = Keys(enroll);
  reg.feature_fingerprint = feature_fingerprint;
  std::vector<std::optional<GmmModel>> fitted(reg.subjects.size());
  internal::ParallelFor(reg.subjects.size(), [&](std::size_t i) {
    fitted[i] = FitGmm(StackFrames(enroll.at(reg.subjects[i])), config);
  });
  for (auto& m : fitted) reg.models.push_back(std::move(*m));
  return reg;
}

Registry EnrollGmmUbm(const UbmModel& ubm, const SubjectFeatures& enroll,
                      const MapConfig& config, const std::string& feature_fingerprint) {
  CheckEnroll(enroll);
  Registry reg;
  reg.backend = Backend::kGmmUbm;
  reg.subjects = Keys(enroll);
  reg.feature_fingerprint = feature_fingerprint;
  reg.ubm = ubm;
  std::vector<std::optional<GmmModel>> adapted(reg.subjects.size());
  internal::ParallelFor(reg.subjects.size(), [&](std::size_t i) {
    adapted[i] = MapAdapt(ubm, StackFrames(enroll.at(reg.subjects[i])), config);
  });
  for (auto& m : adapted) reg.models.push_back(std::move(*m));
  return reg;
}

Registry EnrollDnn(const EmbeddingNetwork& network, const SubjectFeatures& enroll,
                   const EmbeddingConfig& config, const std::string& feature_fingerprint) {
  CheckEnroll(enroll);
  Registry reg;
  reg.backend = Backend::kDnn;
  reg.subjects = Keys(enroll);
  reg.feature_fingerprint = feature_fingerprint;
  reg.network = network;
  reg.embedding_config = config;
  reg.embeddings.resize(reg.subjects.size());
  internal::ParallelFor(reg.subjects.size(), [&](std::size_t i) {
    std::vector<SnoreEmbedding> utts;
    for (const FeatureMatrix& f : enroll.at(reg.subjects[i])) {
      utts.push_back(UtteranceEmbedding(network, f, config));
    }
    reg.embeddings[i] = SubjectEmbedding(utts, reg.subjects[i]);
  });
  return reg;
}

namespace {

bool UsesUbmRatio(const Registry& registry) {
  return registry.backend == Backend::kGmmUbm && registry.ubm_ratio;
}

double BackgroundScore(const Registry& registry, const FeatureMatrix& test) {
  return UsesUbmRatio(registry)
             ? Score(registry.ubm->gmm, test, registry.score_normalization)
             : 0.0;
}

}  // namespace

std::vector<double> ScoreAll(const Registry& registry, const FeatureMatrix& test) {
  registry.Validate();
  if (test.empty()) throw Error(ErrorCode::kEmptyFeatureMatrix, "empty test utterance");
  std::vector<double> scores(registry.size());
  if (registry.backend == Backend::kDnn) {
    const SnoreEmbedding e =
        UtteranceEmbedding(*registry.network, test, registry.embedding_config);
    for (std::size_t i = 0; i < registry.size(); ++i) {
      scores[i] = CosineSimilarity(e, registry.embeddings[i]);
    }
  } else {
    const double background = BackgroundScore(registry, test);
    for (std::size_t i = 0; i < registry.size(); ++i) {
      scores[i] = Score(registry.models[i], test, registry.score_normalization) - background;
    }
  }
  return scores;
}

Identification Identify(const Registry& registry, const FeatureMatrix& test) {
  Identification out;
  out.scores = ScoreAll(registry, test);
  out.index = ArgMax(out.scores);
  out.subject_id = registry.subjects[out.index];
  return out;
}

Verification Verify(const Registry& registry, const std::string& claimed,
                    const FeatureMatrix& test, double threshold) {
  registry.Validate();
  const std::size_t idx = registry.IndexOf(claimed);
  if (test.empty()) throw Error(ErrorCode::kEmptyFeatureMatrix, "empty test utterance");
  double score;
  if (registry.backend == Backend::kDnn) {
    score = CosineSimilarity(
        UtteranceEmbedding(*registry.network, test, registry.embedding_config),
        registry.embeddings[idx]);
  } else {
    score = Score(registry.models[idx], test, registry.score_normalization) -
            BackgroundScore(registry, test);
  }
  return {score >= threshold, score};
}

double CosineSimilarity(const SnoreEmbedding& a, const SnoreEmbedding& b) {
  if (a.vector.size() != b.vector.size()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimensions differ");
  }
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (std::size_t i = 0; i < a.vector.size(); ++i) {
    aa += a.vector[i] * a.vector[i];
    bb += b.vector[i] * b.vector[i];
    ab += a.vector[i] * b.vector[i];
  }
  if (std::abs(std::sqrt(aa) - 1.0) > 1e-6 || std::abs(std::sqrt(bb) - 1.0) > 1e-6) {
    throw Error(ErrorCode::kNonUnitInput, "cosine similarity expects unit vectors");
  }
  return ab;
}

ScoreMatrix BuildScoreMatrix(const Registry& registry, const LabelledFeatures& tests) {
  registry.Validate();
  if (tests.empty()) throw Error(ErrorCode::kEmptyInput, "no test utterances");
  ScoreMatrix out;
  out.col_labels = registry.subjects;
  for (const auto& [label, f] : tests) {
    if (f.empty()) throw Error(ErrorCode::kEmptyFeatureMatrix, "empty test for " + label);
    out.row_labels.push_back(label);
  }
  const std::size_t rows = tests.size(), cols = registry.size();
  if (registry.backend == Backend::kDnn) {
    Matrix test_emb(rows, registry.network->embedding_dim());
    internal::ParallelFor(rows, [&](std::size_t r) {
      const SnoreEmbedding e =
          UtteranceEmbedding(*registry.network, tests[r].second, registry.embedding_config);
      std::copy(e.vector.begin(), e.vector.end(), test_emb.row(r).begin());
    });
    Matrix enrolled(cols, test_emb.cols());
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& v = registry.embeddings[c].vector;
      std::copy(v.begin(), v.end(), enrolled.row(c).begin());
    }
    out.values = kernels::omp::DotScores(test_emb, enrolled);
  } else {
    std::vector<double> background(rows);
    internal::ParallelFor(rows, [&](std::size_t r) {
      background[r] = BackgroundScore(registry, tests[r].second);
    });
    out.values = Matrix(rows, cols);
    internal::ParallelFor(rows * cols, [&](std::size_t i) {
      const std::size_t r = i / cols, c = i % cols;
      out.values(r, c) =
          Score(registry.models[c], tests[r].second, registry.score_normalization) -
          background[r];
    });
  }
  return out;
}

VerificationMetrics RocAndEer(std::vector<double> genuine, std::vector<double> impostor) {
  if (genuine.empty() || impostor.empty()) {
    throw Error(ErrorCode::kEmptyScores, "need genuine and impostor scores");
  }
  std::sort(genuine.begin(), genuine.end());
  std::sort(impostor.begin(), impostor.end());
  std::vector<double> thresholds;
  thresholds.reserve(genuine.size() + impostor.size() + 2);
  thresholds.push_back(-kInf);
  std::merge(genuine.begin(), genuine.end(), impostor.begin(), impostor.end(),
             std::back_inserter(thresholds));
  thresholds.push_back(kInf);
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double g = static_cast<double>(genuine.size());
  const double n = static_cast<double>(impostor.size());
  VerificationMetrics out;
  std::vector<double> fnr;
  for (double t : thresholds) {
    const std::size_t g_acc = CountAtLeast(genuine, t);
    const std::size_t i_acc = CountAtLeast(impostor, t);
    out.roc.push_back({t, g_acc / g, i_acc / n});
    fnr.push_back((genuine.size() - g_acc) / g);
  }
  for (std::size_t j = 1; j < out.roc.size(); ++j) {
    const double d = out.roc[j].fpr - fnr[j];
    if (d > 0.0) continue;
    if (d == 0.0) {
      out.eer = out.roc[j].fpr;
      out.eer_threshold = out.roc[j].threshold;
      break;
    }
    const double d_prev = out.roc[j - 1].fpr - fnr[j - 1];
    const double t = d_prev / (d_prev - d);
    out.eer = out.roc[j - 1].fpr + t * (out.roc[j].fpr - out.roc[j - 1].fpr);
    const double lo = out.roc[j - 1].threshold, hi = out.roc[j].threshold;
    if (std::isinf(lo)) {
      out.eer_threshold = hi;
    } else if (std::isinf(hi)) {
      out.eer_threshold = lo;
    } else {
      out.eer_threshold = lo + t * (hi - lo);
    }
    break;
  }
  return out;
}

OperatingPoint OperatingPointAt(const std::vector<double>& genuine,
                                const std::vector<double>& impostor, double threshold) {
  if (genuine.empty() || impostor.empty()) {
    throw Error(ErrorCode::kEmptyScores, "need genuine and impostor scores");
  }
  std::size_t g_acc = 0, i_rej = 0;
  for (double s : genuine) g_acc += s >= threshold;
  for (double s : impostor) i_rej += s < threshold;
  return {threshold, static_cast<double>(g_acc) / genuine.size(),
          static_cast<double>(i_rej) / impostor.size()};
}

Evaluation Evaluate(const Registry& registry, const LabelledFeatures& tests,
                    const EvalOptions& options) {
  for (const auto& [label, f] : tests) registry.IndexOf(label);
  Evaluation ev;
  ev.scores = BuildScoreMatrix(registry, tests);
  const ScoreMatrix& m = ev.scores;
  EvalReport& rep = ev.report;
  rep.backend = BackendName(registry.backend);
  rep.num_tests = tests.size();
  rep.per_subject_average = options.per_subject_average;

  std::vector<double> genuine, impostor;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    auto row = m.values.row(r);
    const std::vector<double> scores(row.begin(), row.end());
    if (m.col_labels[ArgMax(scores)] == m.row_labels[r]) ++correct;
    for (std::size_t c = 0; c < row.size(); ++c) {
      (m.col_labels[c] == m.row_labels[r] ? genuine : impostor).push_back(row[c]);
    }
  }
  rep.identification_accuracy = static_cast<double>(correct) / tests.size();
  rep.num_genuine = genuine.size();
  rep.num_impostor = impostor.size();

  auto point_at = [&](double threshold) {
    return options.per_subject_average ? PerSubjectOperatingPoint(m, threshold)
                                       : OperatingPointAt(genuine, impostor, threshold);
  };
  const VerificationMetrics vm = RocAndEer(genuine, impostor);
  rep.roc = vm.roc;
  rep.eer = vm.eer;
  rep.eer_threshold = vm.eer_threshold;
  rep.at_eer = point_at(vm.eer_threshold);
  if (options.threshold) rep.operating_point = point_at(*options.threshold);
  return ev;
}

nlohmann::json RegistryToJson(const Registry& registry) {
  registry.Validate();
  nlohmann::json j = {
      {"version", kRegistryVersion},
      {"backend", BackendName(registry.backend)},
      {"subjects", registry.subjects},
      {"feature_fingerprint", registry.feature_fingerprint},
      {"score_normalization",
       registry.score_normalization == ScoreNormalization::kSum ? "sum" : "frame_average"},
  };
  if (registry.backend == Backend::kDnn) {
    nlohmann::json emb = nlohmann::json::array();
    for (const auto& e : registry.embeddings) emb.push_back(e.vector);
    j["embeddings"] = emb;
    j["network"] = NetworkToJson(*registry.network);
    j["embedding_config"] = {
        {"observations", registry.embedding_config.observations},
        {"stride", registry.embedding_config.stride},
        {"accumulation",
         registry.embedding_config.accumulation == Accumulation::kSum ? "sum" : "mean"}};
  } else {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : registry.models) models.push_back(GmmToJson(m));
    j["models"] = models;
    if (registry.ubm) j["ubm"] = UbmToJson(*registry.ubm);
    if (registry.backend == Backend::kGmmUbm) j["ubm_ratio"] = registry.ubm_ratio;
  }
  return j;
}

Registry RegistryFromJson(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kRegistryVersion) {
      throw Error(ErrorCode::kParseError, "unsupported registry version");
    }
    Registry reg;
    reg.backend = ParseBackend(j.at("backend").get<std::string>());
    reg.subjects = j.at("subjects").get<std::vector<std::string>>();
    reg.feature_fingerprint = j.at("feature_fingerprint").get<std::string>();
    reg.score_normalization = j.at("score_normalization").get<std::string>() == "sum"
                                  ? ScoreNormalization::kSum
                                  : ScoreNormalization::kFrameAverage;
    if (reg.backend == Backend::kDnn) {
      const auto vectors = j.at("embeddings").get<std::vector<std::vector<double>>>();
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        reg.embeddings.push_back(
            {vectors[i], EmbeddingLevel::kSubject,
             i < reg.subjects.size() ? reg.subjects[i] : std::string()});
      }
      reg.network = NetworkFromJson(j.at("network"));
      const auto& ec = j.at("embedding_config");
      reg.embedding_config.observations = ec.at("observations").get<int>();
      reg.embedding_config.stride = ec.at("stride").get<int>();
      reg.embedding_config.accumulation =
          ec.at("accumulation").get<std::string>() == "mean" ? Accumulation::kMean
                                                             : Accumulation::kSum;
    } else {
      for (const auto& m : j.at("models")) reg.models.push_back(GmmFromJson(m));
      if (j.contains("ubm")) reg.ubm = UbmFromJson(j.at("ubm"));
      if (reg.backend == Backend::kGmmUbm) reg.ubm_ratio = j.at("ubm_ratio").get<bool>();
    }
    reg.Validate();
    return reg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("registry JSON: ") + e.what());
  }
}

nlohmann::json EvalReportToJson(const EvalReport& report) {
  nlohmann::json roc = nlohmann::json::array();
  for (const RocPoint& p : report.roc) {
    roc.push_back({{"threshold", ThresholdToJson(p.threshold)}, {"tpr", p.tpr}, {"fpr", p.fpr}});
  }
  nlohmann::json j = {
      {"backend", report.backend},
      {"num_tests", report.num_tests},
      {"identification_accuracy", report.identification_accuracy},
      {"num_genuine", report.num_genuine},
      {"num_impostor", report.num_impostor},
      {"eer", report.eer},
      {"eer_threshold", ThresholdToJson(report.eer_threshold)},
      {"at_eer", OperatingPointToJson(report.at_eer)},
      {"per_subject_average", report.per_subject_average},
      {"roc", roc},
  };
  if (report.operating_point) j["operating_point"] = OperatingPointToJson(*report.operating_point);
  return j;
}

void WriteScoreMatrixCsv(std::ostream& out, const ScoreMatrix& matrix) {
  out << "test";
  for (const auto& c : matrix.col_labels) out << ',' << c;
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < matrix.row_labels.size(); ++r) {
    out << matrix.row_labels[r];
    for (std::size_t c = 0; c < matrix.col_labels.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", matrix.values(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void WriteRocCsv(std::ostream& out, const std::vector<RocPoint>& roc) {
  out << "threshold,tpr,fpr\n";
  char buf[64];
  for (const RocPoint& p : roc) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", p.tpr, p.fpr);
    out << FormatThreshold(p.threshold) << buf << '\n';
  }
}

}  // namespace snoreid
