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

#ifndef SNOREID_PIPELINE_H_
#define SNOREID_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "snoreid/dataset.h"
#include "snoreid/dsp.h"
#include "snoreid/embedder.h"
#include "snoreid/gmm.h"
#include "snoreid/recognizer.h"
#include "snoreid/ubm.h"

namespace snoreid {

// Everything one train/enroll/evaluate run depends on. Loaded from a
// TOML-style file (top-level keys plus [mfcc], [gmm], [map], [dnn] and [eval]
// sections); CLI flags override individual fields afterwards.
struct RunConfig {
  std::filesystem::path manifest;
  Backend backend = Backend::kGmm;
  MfccConfig mfcc;
  GmmFitConfig gmm;
  MapConfig map;
  TrainConfig train;
  EmbeddingConfig embedding;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "snoreid_out";
  int threads = 1;
  int min_utterances = 5;
  ScoreNormalization score_normalization = ScoreNormalization::kFrameAverage;
  bool ubm_ratio = true;
  std::optional<double> threshold;
  bool per_subject_average = false;

  // Copies `seed` into the GMM and training configs.
  void ApplySeed(std::uint64_t new_seed);
  // Canonical text form; its SHA-256 is the config hash in run metadata.
  std::string ToText() const;
};

RunConfig ParseRunConfig(const std::string& text);
RunConfig LoadRunConfig(const std::filesystem::path& path);

std::filesystem::path UbmPath(const RunConfig& config);
std::filesystem::path NetworkPath(const RunConfig& config);
std::filesystem::path RegistryPath(const RunConfig& config);

// Features for a list of records, in order; clips are processed in parallel.
std::vector<FeatureMatrix> ExtractAll(const DatasetManifest& manifest,
                                      const std::vector<UtteranceRecord>& records,
                                      const MfccExtractor& extractor);

struct TrainOutcome {
  std::optional<std::filesystem::path> model_path;  // empty for the gmm backend
  std::string fingerprint;
  std::string message;
};

// Development phase: fits the UBM (gmm-ubm) or trains the network (dnn) on
// the split's development set. The plain gmm backend has no shared model.
TrainOutcome CmdTrain(const RunConfig& config);

// Enrollment phase: one registry entry per eligible subject from its
// enrollment utterances. Writes registry.json.
Registry CmdEnroll(const RunConfig& config);

// Evaluation phase on the split's test utterances. Writes report.json,
// scores.csv and roc.csv to the output directory.
Evaluation CmdEvaluate(const RunConfig& config);

// train + enroll + evaluate.
Evaluation RunPipeline(const RunConfig& config);

struct SweepRow {
  int num_components;
  double identification_accuracy;
  double eer;
};

// Runs the full pipeline for each component count (gmm / gmm-ubm backends).
std::vector<SweepRow> RunComponentSweep(const RunConfig& config,
                                        const std::vector<int>& components);

Registry LoadRegistry(const std::filesystem::path& path);
FeatureMatrix FeaturesForWav(const RunConfig& config, const std::filesystem::path& wav);

void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);

}  // namespace snoreid

#endif  // SNOREID_PIPELINE_H_
