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

#include "snoreid/pipeline.h"

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "parallel.h"
#include "snoreid/error.h"
#include "snoreid/kernels.h"
#include "snoreid/util.h"

namespace snoreid {

namespace fs = std::filesystem;

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string StripComment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

class ValueReader {
 public:
  ValueReader(std::string key, std::string raw) : key_(std::move(key)), raw_(std::move(raw)) {}

  std::string String() const {
    if (raw_.size() >= 2 && raw_.front() == '"' && raw_.back() == '"') {
      return raw_.substr(1, raw_.size() - 2);
    }
    return raw_;
  }
  double Double() const {
    try {
      std::size_t used = 0;
      const double v = std::stod(raw_, &used);
      if (used == raw_.size()) return v;
    } catch (const std::exception&) {
    }
    Fail("a number");
  }
  long long Int() const {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(raw_, &used);
      if (used == raw_.size()) return v;
    } catch (const std::exception&) {
    }
    Fail("an integer");
  }
  bool Bool() const {
    if (raw_ == "true") return true;
    if (raw_ == "false") return false;
    Fail("true or false");
  }
  std::vector<int> IntList() const {
    if (raw_.size() < 2 || raw_.front() != '[' || raw_.back() != ']') Fail("a [list]");
    std::vector<int> out;
    std::stringstream ss(raw_.substr(1, raw_.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = Trim(item);
      if (item.empty()) continue;
      out.push_back(static_cast<int>(ValueReader(key_, item).Int()));
    }
    return out;
  }

 private:
  [[noreturn]] void Fail(const char* what) const {
    throw Error(ErrorCode::kParseError, "config key '" + key_ + "' expects " + what +
                                            ", got '" + raw_ + "'");
  }

  std::string key_;
  std::string raw_;
};

using Setter = std::function<void(RunConfig&, const ValueReader&)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> setters = {
      {"manifest", [](RunConfig& c, const ValueReader& v) { c.manifest = v.String(); }},
      {"backend", [](RunConfig& c, const ValueReader& v) { c.backend = ParseBackend(v.String()); }},
      {"seed", [](RunConfig& c, const ValueReader& v) { c.seed = static_cast<std::uint64_t>(v.Int()); }},
      {"out_dir", [](RunConfig& c, const ValueReader& v) { c.out_dir = v.String(); }},
      {"threads", [](RunConfig& c, const ValueReader& v) { c.threads = static_cast<int>(v.Int()); }},
      {"mfcc.sample_rate_hz", [](RunConfig& c, const ValueReader& v) { c.mfcc.sample_rate_hz = static_cast<int>(v.Int()); }},
      {"mfcc.frame_length", [](RunConfig& c, const ValueReader& v) { c.mfcc.frame_length = static_cast<int>(v.Int()); }},
      {"mfcc.frame_shift", [](RunConfig& c, const ValueReader& v) { c.mfcc.frame_shift = static_cast<int>(v.Int()); }},
      {"mfcc.n_fft", [](RunConfig& c, const ValueReader& v) { c.mfcc.n_fft = static_cast<int>(v.Int()); }},
      {"mfcc.num_mel_bins", [](RunConfig& c, const ValueReader& v) { c.mfcc.num_mel_bins = static_cast<int>(v.Int()); }},
      {"mfcc.low_freq_hz", [](RunConfig& c, const ValueReader& v) { c.mfcc.low_freq_hz = v.Double(); }},
      {"mfcc.high_freq_hz", [](RunConfig& c, const ValueReader& v) { c.mfcc.high_freq_hz = v.Double(); }},
      {"mfcc.num_ceps", [](RunConfig& c, const ValueReader& v) { c.mfcc.num_ceps = static_cast<int>(v.Int()); }},
      {"mfcc.log_floor", [](RunConfig& c, const ValueReader& v) { c.mfcc.log_floor = v.Double(); }},
      {"gmm.num_components", [](RunConfig& c, const ValueReader& v) { c.gmm.num_components = static_cast<int>(v.Int()); }},
      {"gmm.max_iters", [](RunConfig& c, const ValueReader& v) { c.gmm.max_iters = static_cast<int>(v.Int()); }},
      {"gmm.rel_tol", [](RunConfig& c, const ValueReader& v) { c.gmm.rel_tol = v.Double(); }},
      {"gmm.variance_floor_scale", [](RunConfig& c, const ValueReader& v) { c.gmm.variance_floor_scale = v.Double(); }},
      {"gmm.n_init", [](RunConfig& c, const ValueReader& v) { c.gmm.n_init = static_cast<int>(v.Int()); }},
      {"map.relevance_factor", [](RunConfig& c, const ValueReader& v) { c.map.relevance_factor = v.Double(); }},
      {"dnn.epochs", [](RunConfig& c, const ValueReader& v) { c.train.epochs = static_cast<int>(v.Int()); }},
      {"dnn.batch_size", [](RunConfig& c, const ValueReader& v) { c.train.batch_size = static_cast<int>(v.Int()); }},
      {"dnn.learning_rate", [](RunConfig& c, const ValueReader& v) { c.train.learning_rate = v.Double(); }},
      {"dnn.beta1", [](RunConfig& c, const ValueReader& v) { c.train.beta1 = v.Double(); }},
      {"dnn.beta2", [](RunConfig& c, const ValueReader& v) { c.train.beta2 = v.Double(); }},
      {"dnn.epsilon", [](RunConfig& c, const ValueReader& v) { c.train.epsilon = v.Double(); }},
      {"dnn.dropout_rate", [](RunConfig& c, const ValueReader& v) { c.train.dropout_rate = v.Double(); }},
      {"dnn.hidden_dims", [](RunConfig& c, const ValueReader& v) { c.train.hidden_dims = v.IntList(); }},
      {"dnn.center_stride", [](RunConfig& c, const ValueReader& v) { c.train.center_stride = static_cast<int>(v.Int()); }},
      {"dnn.observations", [](RunConfig& c, const ValueReader& v) { c.embedding.observations = static_cast<int>(v.Int()); }},
      {"dnn.stride", [](RunConfig& c, const ValueReader& v) { c.embedding.stride = static_cast<int>(v.Int()); }},
      {"dnn.accumulation", [](RunConfig& c, const ValueReader& v) {
         const std::string s = v.String();
         if (s != "sum" && s != "mean") throw Error(ErrorCode::kParseError, "accumulation must be sum or mean");
         c.embedding.accumulation = s == "sum" ? Accumulation::kSum : Accumulation::kMean;
       }},
      {"eval.min_utterances", [](RunConfig& c, const ValueReader& v) { c.min_utterances = static_cast<int>(v.Int()); }},
      {"eval.threshold", [](RunConfig& c, const ValueReader& v) { c.threshold = v.Double(); }},
      {"eval.ubm_ratio", [](RunConfig& c, const ValueReader& v) { c.ubm_ratio = v.Bool(); }},
      {"eval.per_subject_average", [](RunConfig& c, const ValueReader& v) { c.per_subject_average = v.Bool(); }},
      {"eval.score_normalization", [](RunConfig& c, const ValueReader& v) {
         const std::string s = v.String();
         if (s != "frame_average" && s != "sum") {
           throw Error(ErrorCode::kParseError, "score_normalization must be frame_average or sum");
         }
         c.score_normalization = s == "sum" ? ScoreNormalization::kSum : ScoreNormalization::kFrameAverage;
       }},
  };
  return setters;
}

std::string Timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void WriteRunMeta(const RunConfig& config, const std::string& command,
                  const std::string& started, const std::string& fingerprint) {
  WriteJsonFile(config.out_dir / ("run_meta_" + command + ".json"),
                {{"command", command},
                 {"backend", BackendName(config.backend)},
                 {"config_hash", Sha256Hex(config.ToText())},
                 {"seed", config.seed},
                 {"threads", config.threads},
                 {"started_at", started},
                 {"finished_at", Timestamp()},
                 {"model_fingerprint", fingerprint}});
}

struct LoadedSplit {
  DatasetManifest manifest;
  SplitPlan split;
};

LoadedSplit LoadSplit(const RunConfig& config) {
  if (config.manifest.empty()) throw Error(ErrorCode::kMissingFile, "no manifest configured");
  LoadedSplit out{LoadManifest(config.manifest), {}};
  out.split = MakeSplit(out.manifest, config.min_utterances);
  return out;
}

SubjectFeatures FeaturesFor(const DatasetManifest& manifest,
                            const std::map<std::string, std::vector<UtteranceRecord>>& sets,
                            const MfccExtractor& extractor) {
  std::vector<UtteranceRecord> flat;
  for (const auto& [subject, records] : sets) flat.insert(flat.end(), records.begin(), records.end());
  std::vector<FeatureMatrix> features = ExtractAll(manifest, flat, extractor);
  SubjectFeatures out;
  std::size_t i = 0;
  for (const auto& [subject, records] : sets) {
    auto& list = out[subject];
    for (std::size_t r = 0; r < records.size(); ++r) list.push_back(std::move(features[i++]));
  }
  return out;
}

void Prepare(const RunConfig& config) {
  kernels::SetNumThreads(config.threads);
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + config.out_dir.string());
}

}  // namespace

void RunConfig::ApplySeed(std::uint64_t new_seed) {
  seed = new_seed;
  gmm.seed = new_seed;
  train.seed = new_seed;
}

std::string RunConfig::ToText() const {
  std::ostringstream os;
  os.precision(17);
  os << "manifest = \"" << manifest.generic_string() << "\"\n"
     << "backend = \"" << BackendName(backend) << "\"\n"
     << "seed = " << seed << "\n"
     << "out_dir = \"" << out_dir.generic_string() << "\"\n"
     << "threads = " << threads << "\n\n"
     << "[mfcc]\n"
     << "sample_rate_hz = " << mfcc.sample_rate_hz << "\nframe_length = " << mfcc.frame_length
     << "\nframe_shift = " << mfcc.frame_shift << "\nn_fft = " << mfcc.n_fft
     << "\nnum_mel_bins = " << mfcc.num_mel_bins << "\nlow_freq_hz = " << mfcc.low_freq_hz
     << "\nhigh_freq_hz = " << mfcc.high_freq_hz << "\nnum_ceps = " << mfcc.num_ceps
     << "\nlog_floor = " << mfcc.log_floor << "\n\n"
     << "[gmm]\n"
     << "num_components = " << gmm.num_components << "\nmax_iters = " << gmm.max_iters
     << "\nrel_tol = " << gmm.rel_tol << "\nvariance_floor_scale = " << gmm.variance_floor_scale
     << "\nn_init = " << gmm.n_init << "\n\n"
     << "[map]\nrelevance_factor = " << map.relevance_factor << "\n\n"
     << "[dnn]\n"
     << "epochs = " << train.epochs << "\nbatch_size = " << train.batch_size
     << "\nlearning_rate = " << train.learning_rate << "\nbeta1 = " << train.beta1
     << "\nbeta2 = " << train.beta2 << "\nepsilon = " << train.epsilon
     << "\ndropout_rate = " << train.dropout_rate << "\nhidden_dims = [";
  for (std::size_t i = 0; i < train.hidden_dims.size(); ++i) {
    os << (i ? ", " : "") << train.hidden_dims[i];
  }
  os << "]\ncenter_stride = " << train.center_stride
     << "\nobservations = " << embedding.observations << "\nstride = " << embedding.stride
     << "\naccumulation = \"" << (embedding.accumulation == Accumulation::kSum ? "sum" : "mean")
     << "\"\n\n"
     << "[eval]\n"
     << "min_utterances = " << min_utterances << "\n";
  if (threshold) os << "threshold = " << *threshold << "\n";
  os << "ubm_ratio = " << (ubm_ratio ? "true" : "false") << "\n";
  os << "per_subject_average = " << (per_subject_average ? "true" : "false") << "\n"
     << "score_normalization = \""
     << (score_normalization == ScoreNormalization::kSum ? "sum" : "frame_average") << "\"\n";
  return os.str();
}

RunConfig ParseRunConfig(const std::string& text) {
  RunConfig config;
  std::optional<std::uint64_t> seed;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = Trim(StripComment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": bad section");
      }
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = (section.empty() ? "" : section + ".") + Trim(line.substr(0, eq));
    const auto it = Setters().find(key);
    if (it == Setters().end()) {
      throw Error(ErrorCode::kParseError, "unknown config key '" + key + "'");
    }
    const ValueReader value(key, Trim(line.substr(eq + 1)));
    if (key == "seed") {
      seed = static_cast<std::uint64_t>(value.Int());
    } else {
      it->second(config, value);
    }
  }
  config.ApplySeed(seed.value_or(config.seed));
  return config;
}

RunConfig LoadRunConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "config not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig config = ParseRunConfig(ss.str());
  const fs::path base = path.parent_path();
  if (!config.manifest.empty() && config.manifest.is_relative()) {
    config.manifest = base / config.manifest;
  }
  if (config.out_dir.is_relative()) config.out_dir = base / config.out_dir;
  return config;
}

fs::path UbmPath(const RunConfig& config) { return config.out_dir / "ubm.json"; }
fs::path NetworkPath(const RunConfig& config) { return config.out_dir / "network.json"; }
fs::path RegistryPath(const RunConfig& config) { return config.out_dir / "registry.json"; }

void WriteJsonFile(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

nlohmann::json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

std::vector<FeatureMatrix> ExtractAll(const DatasetManifest& manifest,
                                      const std::vector<UtteranceRecord>& records,
                                      const MfccExtractor& extractor) {
  std::vector<FeatureMatrix> out(records.size());
  internal::ParallelFor(records.size(), [&](std::size_t i) {
    try {
      out[i] = extractor.Extract(LoadUtterance(manifest, records[i]));
    } catch (const Error& e) {
      // Name the offending file whatever stage failed.
      const std::string path = records[i].audio_path.string();
      const std::string what = e.what();
      throw Error(e.code(), what.find(path) == std::string::npos ? path + ": " + what : what);
    }
  });
  return out;
}

TrainOutcome CmdTrain(const RunConfig& config) {
  const std::string started = Timestamp();
  Prepare(config);
  const LoadedSplit data = LoadSplit(config);
  TrainOutcome outcome;
  if (config.backend == Backend::kGmm) {
    outcome.message = "gmm backend: no shared model to train";
    WriteRunMeta(config, "train", started, "");
    return outcome;
  }
  const MfccExtractor extractor(config.mfcc);
  const SubjectFeatures dev = FeaturesFor(data.manifest, data.split.development, extractor);
  if (config.backend == Backend::kGmmUbm) {
    const UbmModel ubm = FitUbm(dev, config.gmm);
    outcome.model_path = UbmPath(config);
    outcome.fingerprint = ubm.Fingerprint();
    WriteJsonFile(*outcome.model_path, UbmToJson(ubm));
    outcome.message = "UBM with " + std::to_string(ubm.gmm.num_components()) +
                      " components written to " + outcome.model_path->string();
  } else {
    const EmbeddingNetwork net = TrainNetwork(dev, config.train);
    outcome.model_path = NetworkPath(config);
    outcome.fingerprint = NetworkFingerprint(net);
    WriteJsonFile(*outcome.model_path, NetworkToJson(net));
    outcome.message = "network over " + std::to_string(net.num_outputs()) +
                      " subjects written to " + outcome.model_path->string();
  }
  WriteRunMeta(config, "train", started, outcome.fingerprint);
  return outcome;
}

Registry CmdEnroll(const RunConfig& config) {
  const std::string started = Timestamp();
  Prepare(config);
  const LoadedSplit data = LoadSplit(config);
  const MfccExtractor extractor(config.mfcc);
  const std::string fp = config.mfcc.Fingerprint();
  Registry reg;
  if (config.backend == Backend::kGmm) {
    reg = EnrollGmm(FeaturesFor(data.manifest, data.split.enroll, extractor), config.gmm, fp);
  } else if (config.backend == Backend::kGmmUbm) {
    const UbmModel ubm = UbmFromJson(ReadJsonFile(UbmPath(config)));
    reg = EnrollGmmUbm(ubm, FeaturesFor(data.manifest, data.split.enroll, extractor),
                       config.map, fp);
  } else {
    const EmbeddingNetwork net = NetworkFromJson(ReadJsonFile(NetworkPath(config)));
    reg = EnrollDnn(net, FeaturesFor(data.manifest, data.split.enroll, extractor),
                    config.embedding, fp);
  }
  reg.score_normalization = config.score_normalization;
  reg.ubm_ratio = config.ubm_ratio;
  const nlohmann::json j = RegistryToJson(reg);
  WriteJsonFile(RegistryPath(config), j);
  WriteRunMeta(config, "enroll", started, Sha256Hex(j.dump()));
  return reg;
}

Registry LoadRegistry(const fs::path& path) { return RegistryFromJson(ReadJsonFile(path)); }

Evaluation CmdEvaluate(const RunConfig& config) {
  const std::string started = Timestamp();
  Prepare(config);
  const Registry reg = LoadRegistry(RegistryPath(config));
  if (reg.feature_fingerprint != config.mfcc.Fingerprint()) {
    throw Error(ErrorCode::kInvalidArgument,
                "registry was enrolled with different features (" + reg.feature_fingerprint + ")");
  }
  const LoadedSplit data = LoadSplit(config);
  std::vector<UtteranceRecord> records;
  for (const std::string& subject : reg.subjects) {
    const auto it = data.split.test.find(subject);
    if (it == data.split.test.end()) {
      throw Error(ErrorCode::kUnknownSubject, "no test utterance for enrolled subject " + subject);
    }
    records.push_back(it->second);
  }
  const MfccExtractor extractor(config.mfcc);
  std::vector<FeatureMatrix> features = ExtractAll(data.manifest, records, extractor);
  LabelledFeatures tests;
  for (std::size_t i = 0; i < records.size(); ++i) {
    tests.emplace_back(records[i].subject_id, std::move(features[i]));
  }
  Evaluation ev = Evaluate(reg, tests, {config.threshold, config.per_subject_average});

  WriteJsonFile(config.out_dir / "report.json", EvalReportToJson(ev.report));
  std::ofstream scores(config.out_dir / "scores.csv", std::ios::trunc);
  WriteScoreMatrixCsv(scores, ev.scores);
  std::ofstream roc(config.out_dir / "roc.csv", std::ios::trunc);
  WriteRocCsv(roc, ev.report.roc);
  if (!scores || !roc) throw Error(ErrorCode::kIoError, "cannot write evaluation CSVs");
  WriteRunMeta(config, "evaluate", started, "");
  return ev;
}

Evaluation RunPipeline(const RunConfig& config) {
  CmdTrain(config);
  CmdEnroll(config);
  return CmdEvaluate(config);
}

std::vector<SweepRow> RunComponentSweep(const RunConfig& config,
                                        const std::vector<int>& components) {
  if (config.backend == Backend::kDnn) {
    throw Error(ErrorCode::kInvalidArgument, "component sweep applies to gmm backends only");
  }
  std::vector<SweepRow> rows;
  for (int k : components) {
    RunConfig c = config;
    c.gmm.num_components = k;
    c.out_dir = config.out_dir / ("k" + std::to_string(k));
    const Evaluation ev = RunPipeline(c);
    rows.push_back({k, ev.report.identification_accuracy, ev.report.eer});
  }
  return rows;
}

FeatureMatrix FeaturesForWav(const RunConfig& config, const fs::path& wav) {
  return MfccExtractor(config.mfcc).Extract(ReadWav(wav));
}

}  // namespace snoreid
