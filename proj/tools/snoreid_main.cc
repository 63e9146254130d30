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

// snoreid command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "snoreid/error.h"
#include "snoreid/kernels.h"
#include "snoreid/pipeline.h"

namespace {

using snoreid::RunConfig;

struct CommonFlags {
  std::string config;
  std::string manifest;
  std::string backend;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> components;
};

void AddCommonFlags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config, "Run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", flags->manifest, "Dataset manifest CSV");
  cmd->add_option("--backend", flags->backend, "gmm | gmm-ubm | dnn");
  cmd->add_option("--out-dir", flags->out_dir, "Directory for models and reports");
  cmd->add_option("--seed", flags->seed, "Random seed for every stochastic stage");
  cmd->add_option("--threads", flags->threads, "OpenMP thread count")->check(CLI::PositiveNumber);
  cmd->add_option("--components", flags->components, "GMM mixture components")
      ->check(CLI::PositiveNumber);
}

RunConfig ResolveConfig(const CommonFlags& flags) {
  RunConfig config = flags.config.empty() ? RunConfig{} : snoreid::LoadRunConfig(flags.config);
  if (!flags.manifest.empty()) config.manifest = flags.manifest;
  if (!flags.backend.empty()) config.backend = snoreid::ParseBackend(flags.backend);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.seed) config.ApplySeed(*flags.seed);
  if (flags.threads) config.threads = *flags.threads;
  if (flags.components) config.gmm.num_components = *flags.components;
  snoreid::kernels::SetNumThreads(config.threads);
  return config;
}

void PrintReport(const snoreid::EvalReport& r) {
  std::printf("backend                 %s\n", r.backend.c_str());
  std::printf("tests                   %zu\n", r.num_tests);
  std::printf("identification accuracy %.4f\n", r.identification_accuracy);
  std::printf("trials                  %zu genuine, %zu impostor\n", r.num_genuine,
              r.num_impostor);
  std::printf("EER                     %.4f (threshold %.6g)\n", r.eer, r.eer_threshold);
  if (r.operating_point) {
    std::printf("at threshold %.6g       TPR %.4f  TNR %.4f\n", r.operating_point->threshold,
                r.operating_point->tpr, r.operating_point->tnr);
  }
}

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw snoreid::Error(snoreid::ErrorCode::kInvalidArgument,
                           "bad component list entry '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subject identification and verification from snoring audio"};
  app.require_subcommand(1);

  // synth
  snoreid::SyntheticSpec spec;
  std::string synth_out = "synthetic";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic snore corpus and manifest");
  synth->add_option("--out-dir", synth_out, "Output directory");
  synth->add_option("--subjects", spec.n_subjects, "Number of subjects")->check(CLI::PositiveNumber);
  synth->add_option("--utterances", spec.utterances_per_subject, "Utterances per subject")
      ->check(CLI::PositiveNumber);
  synth->add_option("--duration", spec.duration_s, "Seconds per utterance")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", spec.seed, "Corpus seed");
  synth->add_option("--snr-db", spec.snr_db, "Additive noise SNR in dB");

  CommonFlags train_flags, enroll_flags, eval_flags, run_flags, id_flags, verify_flags, dump_flags;
  auto* train = app.add_subcommand("train", "Fit the UBM or train the embedding network");
  AddCommonFlags(train, &train_flags);
  auto* enroll = app.add_subcommand("enroll", "Build the subject registry");
  AddCommonFlags(enroll, &enroll_flags);

  std::optional<double> eval_threshold;
  bool per_subject = false;
  std::string sweep;
  auto* evaluate = app.add_subcommand("evaluate", "Score the test split and write reports");
  AddCommonFlags(evaluate, &eval_flags);
  evaluate->add_option("--threshold", eval_threshold, "Report TPR/TNR at this threshold");
  evaluate->add_flag("--per-subject-average", per_subject,
                     "Average TPR/TNR over claimed subjects");
  evaluate->add_option("--sweep-k", sweep,
                       "Comma-separated component counts; reruns the whole pipeline per value");

  std::optional<double> run_threshold;
  auto* run = app.add_subcommand("run", "train, enroll and evaluate in one go");
  AddCommonFlags(run, &run_flags);
  run->add_option("--threshold", run_threshold, "Report TPR/TNR at this threshold");

  std::string id_wav;
  auto* identify = app.add_subcommand("identify", "Identify the subject of one recording");
  AddCommonFlags(identify, &id_flags);
  identify->add_option("--wav", id_wav, "Recording to identify")->required()->check(CLI::ExistingFile);

  std::string verify_wav, claim;
  double verify_threshold = 0.0;
  auto* verify = app.add_subcommand("verify", "Accept or reject a claimed identity");
  AddCommonFlags(verify, &verify_flags);
  verify->add_option("--wav", verify_wav, "Recording")->required()->check(CLI::ExistingFile);
  verify->add_option("--claim", claim, "Claimed subject id")->required();
  verify->add_option("--threshold", verify_threshold, "Acceptance threshold")->required();

  std::string dump_wav, dump_out;
  bool spectrogram = false;
  auto* dump = app.add_subcommand("dump-features", "Write the MFCC (or power spectrogram) CSV");
  AddCommonFlags(dump, &dump_flags);
  dump->add_option("--wav", dump_wav, "Recording")->required()->check(CLI::ExistingFile);
  dump->add_option("--out", dump_out, "Output CSV (stdout when omitted)");
  dump->add_flag("--spectrogram", spectrogram, "Dump power spectra instead of MFCCs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const auto manifest = snoreid::GenerateSyntheticCorpus(spec, synth_out);
      std::printf("wrote %zu utterances for %zu subjects to %s\n", manifest.records.size(),
                  manifest.num_subjects(), synth_out.c_str());
    } else if (*train) {
      const auto outcome = snoreid::CmdTrain(ResolveConfig(train_flags));
      std::printf("%s\n", outcome.message.c_str());
    } else if (*enroll) {
      const RunConfig config = ResolveConfig(enroll_flags);
      const auto reg = snoreid::CmdEnroll(config);
      std::printf("enrolled %zu subjects into %s\n", reg.subjects.size(),
                  snoreid::RegistryPath(config).c_str());
    } else if (*evaluate) {
      RunConfig config = ResolveConfig(eval_flags);
      if (eval_threshold) config.threshold = eval_threshold;
      if (per_subject) config.per_subject_average = true;
      if (!sweep.empty()) {
        std::printf("components,identification_accuracy,eer\n");
        for (const auto& row : snoreid::RunComponentSweep(config, ParseIntList(sweep))) {
          std::printf("%d,%.6f,%.6f\n", row.num_components, row.identification_accuracy, row.eer);
        }
      } else {
        PrintReport(snoreid::CmdEvaluate(config).report);
      }
    } else if (*run) {
      RunConfig config = ResolveConfig(run_flags);
      if (run_threshold) config.threshold = run_threshold;
      PrintReport(snoreid::RunPipeline(config).report);
    } else if (*identify) {
      const RunConfig config = ResolveConfig(id_flags);
      const auto reg = snoreid::LoadRegistry(snoreid::RegistryPath(config));
      const auto result = snoreid::Identify(reg, snoreid::FeaturesForWav(config, id_wav));
      std::printf("%s\n", result.subject_id.c_str());
      for (std::size_t i = 0; i < reg.subjects.size(); ++i) {
        std::fprintf(stderr, "%s %.9g\n", reg.subjects[i].c_str(), result.scores[i]);
      }
    } else if (*verify) {
      const RunConfig config = ResolveConfig(verify_flags);
      const auto reg = snoreid::LoadRegistry(snoreid::RegistryPath(config));
      const auto v = snoreid::Verify(reg, claim, snoreid::FeaturesForWav(config, verify_wav),
                                     verify_threshold);
      std::printf("%s %.9g\n", v.accept ? "accept" : "reject", v.score);
    } else if (*dump) {
      const RunConfig config = ResolveConfig(dump_flags);
      std::ofstream file;
      if (!dump_out.empty()) {
        file.open(dump_out, std::ios::trunc);
        if (!file) throw snoreid::Error(snoreid::ErrorCode::kIoError, "cannot write " + dump_out);
      }
      std::ostream& out = dump_out.empty() ? std::cout : file;
      const snoreid::MfccExtractor extractor(config.mfcc);
      const auto clip = snoreid::ReadWav(dump_wav);
      if (spectrogram) {
        snoreid::WriteSpectrogramCsv(out, extractor.PowerSpectrogram(clip));
      } else {
        snoreid::WriteFeatureCsv(out, extractor.Extract(clip));
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "snoreid: %s\n", e.what());
    return 1;
  }
  return 0;
}
