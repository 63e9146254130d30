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

#ifndef SNOREID_DATASET_H_
#define SNOREID_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "snoreid/audio.h"

namespace snoreid {

struct UtteranceRecord {
  std::string subject_id;
  int utterance_index = 0;
  // Resolved against the manifest directory when loaded.
  std::filesystem::path audio_path;
  double duration_s = 0.0;

  bool operator==(const UtteranceRecord&) const = default;
};

struct DatasetManifest {
  std::vector<UtteranceRecord> records;
  int sample_rate_hz = 16000;

  std::size_t num_subjects() const;
  // Records per subject, sorted by utterance_index.
  std::map<std::string, std::vector<UtteranceRecord>> BySubject() const;
};

// CSV with header `subject_id,utterance_index,audio_path,duration_s`; paths
// are relative to the manifest's directory. The sample rate comes from an
// optional sidecar `<manifest>.conf` holding `sample_rate_hz = <n>` (16000
// when absent).
DatasetManifest LoadManifest(const std::filesystem::path& path);
// Writes the CSV and its sidecar. Paths are stored relative to the manifest.
void WriteManifest(const DatasetManifest& manifest, const std::filesystem::path& path);
std::filesystem::path ManifestSidecarPath(const std::filesystem::path& manifest_path);

// Rejects duplicates, non-positive durations and bad sample rates.
void ValidateManifest(const DatasetManifest& manifest);

// Reads the record's WAV and checks its rate against the manifest.
AudioClip LoadUtterance(const DatasetManifest& manifest, const UtteranceRecord& record);

// Subjects with at least `min_utterances` recordings are eligible. Ordering is
// by ascending utterance_index: the first min_utterances - 1 recordings enroll
// and the next one is the test. Every subject contributes its first
// min_utterances - 1 recordings (or all of them, if fewer) to development.
struct SplitPlan {
  std::vector<std::string> eligible_subjects;  // ascending id order
  std::map<std::string, std::vector<UtteranceRecord>> enroll;
  std::map<std::string, UtteranceRecord> test;
  std::map<std::string, std::vector<UtteranceRecord>> development;
};

SplitPlan MakeSplit(const DatasetManifest& manifest, int min_utterances = 5);

// Synthetic stand-in corpus. Each subject has three resonances at
// subject-specific frequencies in [min_hz, max_hz] and a subject-specific
// pulse rate; every utterance jitters those frequencies by up to +/-jitter,
// lets each resonance gain drift slowly over time and adds white noise at
// snr_db.
struct SyntheticSpec {
  int n_subjects = 10;
  int utterances_per_subject = 5;
  double duration_s = 2.0;
  std::uint64_t seed = 7;
  int sample_rate_hz = 16000;
  double jitter = 0.03;
  double snr_db = 20.0;
  double min_hz = 80.0;
  double max_hz = 2000.0;

  void Validate() const;
};

// Deterministic in (spec, seed); independent of thread count.
std::vector<double> SynthesizeUtterance(const SyntheticSpec& spec, int subject,
                                        int utterance);

// Writes `<out_dir>/wav/*.wav` and `<out_dir>/manifest.csv` (+ sidecar).
DatasetManifest GenerateSyntheticCorpus(const SyntheticSpec& spec,
                                        const std::filesystem::path& out_dir);

std::string SyntheticSubjectId(int subject);

}  // namespace snoreid

#endif  // SNOREID_DATASET_H_
