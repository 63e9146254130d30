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

#include "snoreid/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "snoreid/error.h"
#include "snoreid/util.h"

namespace snoreid {

namespace fs = std::filesystem;

namespace {

constexpr char kManifestHeader[] = "subject_id,utterance_index,audio_path,duration_s";

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(Trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int ReadSampleRate(const fs::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) return 16000;
  std::string line;
  while (std::getline(in, line)) {
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || Trim(line.substr(0, eq)) != "sample_rate_hz") {
      throw Error(ErrorCode::kParseError, sidecar.string() + ": unexpected line '" + line + "'");
    }
    try {
      std::size_t used = 0;
      const std::string value = Trim(line.substr(eq + 1));
      const int rate = std::stoi(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return rate;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, sidecar.string() + ": bad sample rate");
    }
  }
  throw Error(ErrorCode::kParseError, sidecar.string() + ": no sample_rate_hz line");
}

}  // namespace

std::size_t DatasetManifest::num_subjects() const {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.subject_id);
  return ids.size();
}

std::map<std::string, std::vector<UtteranceRecord>> DatasetManifest::BySubject() const {
  std::map<std::string, std::vector<UtteranceRecord>> out;
  for (const auto& r : records) out[r.subject_id].push_back(r);
  for (auto& [id, list] : out) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.utterance_index < b.utterance_index;
    });
  }
  return out;
}

fs::path ManifestSidecarPath(const fs::path& manifest_path) {
  fs::path p = manifest_path;
  p += ".conf";
  return p;
}

void ValidateManifest(const DatasetManifest& manifest) {
  if (manifest.sample_rate_hz <= 0) {
    throw Error(ErrorCode::kBadSampleRate,
                "sample rate " + std::to_string(manifest.sample_rate_hz));
  }
  if (manifest.records.empty()) throw Error(ErrorCode::kParseError, "manifest has no records");
  std::set<std::pair<std::string, int>> seen;
  for (const auto& r : manifest.records) {
    if (r.subject_id.empty()) throw Error(ErrorCode::kParseError, "empty subject id");
    if (r.utterance_index < 0) {
      throw Error(ErrorCode::kParseError, "negative utterance index for " + r.subject_id);
    }
    if (!(r.duration_s > 0.0)) {
      throw Error(ErrorCode::kParseError, "non-positive duration for " + r.subject_id);
    }
    if (!seen.insert({r.subject_id, r.utterance_index}).second) {
      throw Error(ErrorCode::kDuplicateUtterance,
                  r.subject_id + " index " + std::to_string(r.utterance_index));
    }
  }
}

DatasetManifest LoadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "manifest not found: " + path.string());
  DatasetManifest manifest;
  manifest.sample_rate_hz = ReadSampleRate(ManifestSidecarPath(path));
  const fs::path base = path.parent_path();

  std::string line;
  if (!std::getline(in, line) || Trim(line) != kManifestHeader) {
    throw Error(ErrorCode::kParseError,
                path.string() + ": expected header '" + kManifestHeader + "'");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsv(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 4) throw Error(ErrorCode::kParseError, where + ": expected 4 fields");
    UtteranceRecord r;
    r.subject_id = fields[0];
    try {
      std::size_t used = 0;
      r.utterance_index = std::stoi(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument(fields[1]);
      r.duration_s = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument(fields[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, where + ": bad number");
    }
    const fs::path audio(fields[2]);
    r.audio_path = audio.is_absolute() ? audio : base / audio;
    manifest.records.push_back(std::move(r));
  }
  ValidateManifest(manifest);
  return manifest;
}

void WriteManifest(const DatasetManifest& manifest, const fs::path& path) {
  ValidateManifest(manifest);
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << kManifestHeader << '\n';
  char dur[32];
  for (const auto& r : manifest.records) {
    std::snprintf(dur, sizeof(dur), "%.6f", r.duration_s);
    const fs::path rel = r.audio_path.is_absolute()
                             ? fs::relative(r.audio_path, fs::absolute(base))
                             : r.audio_path.lexically_relative(base);
    out << r.subject_id << ',' << r.utterance_index << ',' << rel.generic_string() << ','
        << dur << '\n';
  }
  std::ofstream side(ManifestSidecarPath(path), std::ios::trunc);
  side << "sample_rate_hz = " << manifest.sample_rate_hz << '\n';
  if (!out || !side) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

AudioClip LoadUtterance(const DatasetManifest& manifest, const UtteranceRecord& record) {
  AudioClip clip = ReadWav(record.audio_path);
  if (clip.sample_rate_hz != manifest.sample_rate_hz) {
    throw Error(ErrorCode::kBadSampleRate,
                record.audio_path.string() + ": rate " +
                    std::to_string(clip.sample_rate_hz) + " != manifest rate " +
                    std::to_string(manifest.sample_rate_hz));
  }
  return clip;
}

SplitPlan MakeSplit(const DatasetManifest& manifest, int min_utterances) {
  if (min_utterances < 2) {
    throw Error(ErrorCode::kInvalidArgument, "min_utterances must be >= 2");
  }
  const auto enroll_count = static_cast<std::size_t>(min_utterances - 1);
  SplitPlan plan;
  for (const auto& [subject, records] : manifest.BySubject()) {
    const std::size_t dev_count = std::min(enroll_count, records.size());
    plan.development[subject].assign(records.begin(), records.begin() + dev_count);
    if (records.size() < static_cast<std::size_t>(min_utterances)) continue;
    plan.eligible_subjects.push_back(subject);
    plan.enroll[subject].assign(records.begin(), records.begin() + enroll_count);
    plan.test.emplace(subject, records[enroll_count]);
  }
  if (plan.eligible_subjects.empty()) {
    throw Error(ErrorCode::kNoEligibleSubjects,
                "no subject has " + std::to_string(min_utterances) + " utterances");
  }
  return plan;
}

void SyntheticSpec::Validate() const {
  if (n_subjects < 2) throw Error(ErrorCode::kInvalidArgument, "n_subjects must be >= 2");
  if (utterances_per_subject < 5) {
    throw Error(ErrorCode::kInvalidArgument, "utterances_per_subject must be >= 5");
  }
  if (!(duration_s > 0.0) || sample_rate_hz <= 0 || !(jitter >= 0.0 && jitter < 1.0) ||
      !(min_hz > 0.0 && max_hz > min_hz && max_hz < 0.5 * sample_rate_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid synthetic corpus spec");
  }
}

std::string SyntheticSubjectId(int subject) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%03d", subject);
  return buf;
}

namespace {

struct SubjectVoice {
  double centers[3];
  double bandwidths[3];
  double gains[3];
  double pulse_hz;
  double noise_mix;
};

SubjectVoice VoiceFor(const SyntheticSpec& spec, int subject) {
  Rng rng(DeriveSeed(spec.seed, static_cast<std::uint64_t>(subject)));
  SubjectVoice v{};
  const double lo = std::log(spec.min_hz), hi = std::log(spec.max_hz);
  for (double& c : v.centers) c = std::exp(lo + (hi - lo) * UniformUnit(rng));
  std::sort(std::begin(v.centers), std::end(v.centers));
  for (int i = 0; i < 3; ++i) {
    v.bandwidths[i] = v.centers[i] * (0.05 + 0.07 * UniformUnit(rng));
    v.gains[i] = 0.4 + 0.6 * UniformUnit(rng);
  }
  v.pulse_hz = 30.0 + 60.0 * UniformUnit(rng);
  v.noise_mix = 0.1 + 0.3 * UniformUnit(rng);
  return v;
}

}  // namespace

std::vector<double> SynthesizeUtterance(const SyntheticSpec& spec, int subject,
                                        int utterance) {
  const SubjectVoice voice = VoiceFor(spec, subject);
  Rng rng(DeriveSeed(DeriveSeed(spec.seed, static_cast<std::uint64_t>(subject)),
                     1000 + static_cast<std::uint64_t>(utterance)));
  const double fs = spec.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * fs));
  auto jittered = [&](double f) { return f * (1.0 + spec.jitter * (2.0 * UniformUnit(rng) - 1.0)); };

  double centers[3];
  for (int i = 0; i < 3; ++i) centers[i] = jittered(voice.centers[i]);
  const double pulse_hz = jittered(voice.pulse_hz);

  // Excitation: jittered pulse train mixed with white noise.
  std::vector<double> excitation(n, 0.0);
  double next_pulse = UniformUnit(rng) * fs / pulse_hz;
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<double>(i) >= next_pulse) {
      excitation[i] = 1.0;
      next_pulse += fs / pulse_hz * (1.0 + 0.05 * (2.0 * UniformUnit(rng) - 1.0));
    }
    excitation[i] += voice.noise_mix * StandardNormal(rng);
  }

  // Parallel two-pole resonators with slowly drifting gains.
  std::vector<double> signal(n, 0.0);
  for (int i = 0; i < 3; ++i) {
    const double r = std::exp(-std::numbers::pi * voice.bandwidths[i] / fs);
    const double theta = 2.0 * std::numbers::pi * centers[i] / fs;
    const double a1 = 2.0 * r * std::cos(theta), a2 = -r * r;
    const double gain = voice.gains[i] * (1.0 - r);
    const double drift_hz = 0.5 + 1.5 * UniformUnit(rng);
    const double phase = 2.0 * std::numbers::pi * UniformUnit(rng);
    double y1 = 0.0, y2 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double y = excitation[t] + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      const double drift =
          1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * drift_hz * t / fs + phase);
      signal[t] += gain * drift * y;
    }
  }

  // Breath-like envelope.
  double power = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double env = std::sin(std::numbers::pi * (static_cast<double>(t) + 0.5) / n);
    signal[t] *= env * env;
    power += signal[t] * signal[t];
  }
  power /= std::max<std::size_t>(n, 1);
  const double noise_sd = std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0));
  double peak = 0.0;
  for (double& v : signal) {
    v += noise_sd * StandardNormal(rng);
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0) {
    for (double& v : signal) v *= 0.8 / peak;
  }
  return signal;
}

DatasetManifest GenerateSyntheticCorpus(const SyntheticSpec& spec, const fs::path& out_dir) {
  spec.Validate();
  std::error_code ec;
  fs::create_directories(out_dir / "wav", ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + (out_dir / "wav").string());

  const int total = spec.n_subjects * spec.utterances_per_subject;
  std::vector<std::vector<double>> audio(total);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < total; ++i) {
    audio[i] = SynthesizeUtterance(spec, i / spec.utterances_per_subject,
                                   i % spec.utterances_per_subject);
  }

  DatasetManifest manifest;
  manifest.sample_rate_hz = spec.sample_rate_hz;
  for (int i = 0; i < total; ++i) {
    const int subject = i / spec.utterances_per_subject;
    const int utt = i % spec.utterances_per_subject;
    const std::string id = SyntheticSubjectId(subject);
    const fs::path wav = out_dir / "wav" / (id + "_u" + std::to_string(utt) + ".wav");
    WriteWav(wav, audio[i], spec.sample_rate_hz);
    manifest.records.push_back(
        {id, utt, wav, static_cast<double>(audio[i].size()) / spec.sample_rate_hz});
  }
  WriteManifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace snoreid
