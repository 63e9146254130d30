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

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <fstream>
#include <memory>
#include <sstream>

#include "gtest/gtest.h"
#include "snoreid/error.h"
#include "unit/test_util.h"

namespace snoreid {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
std::optional<ErrorCode> CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Scratch directories live until the test binary exits.
fs::path Scratch(const std::string& tag) {
  static std::vector<std::unique_ptr<testing::TempDir>> dirs;
  dirs.push_back(std::make_unique<testing::TempDir>(tag));
  return dirs.back()->path();
}

// A small corpus shared by the tests in this file.
const fs::path& SmallCorpus() {
  static const fs::path manifest = [] {
    const fs::path dir = Scratch("pipeline_corpus");
    SyntheticSpec spec;
    spec.n_subjects = 3;
    spec.duration_s = 1.0;
    spec.seed = 11;
    GenerateSyntheticCorpus(spec, dir);
    return dir / "manifest.csv";
  }();
  return manifest;
}

RunConfig SmallRun(Backend backend, const std::string& tag) {
  RunConfig c;
  c.manifest = SmallCorpus();
  c.backend = backend;
  c.out_dir = Scratch(tag);
  c.gmm.num_components = 4;
  c.train.epochs = 3;
  c.train.hidden_dims = {16, 16};
  c.train.center_stride = 4;
  c.ApplySeed(5);
  return c;
}

TEST(RunConfigTest, ParsesEverySection) {
  const RunConfig c = ParseRunConfig(R"(# comment
manifest = "data/m.csv"
backend = "gmm-ubm"
seed = 9
threads = 2

[mfcc]
num_ceps = 20

[gmm]
num_components = 8
n_init = 2

[map]
relevance_factor = 8.5

[dnn]
epochs = 12
hidden_dims = [64, 32]
accumulation = "mean"

[eval]
min_utterances = 4
threshold = -0.25
ubm_ratio = false
per_subject_average = true
score_normalization = "sum"
)");
  EXPECT_EQ(c.manifest, "data/m.csv");
  EXPECT_EQ(c.backend, Backend::kGmmUbm);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.gmm.seed, 9u);
  EXPECT_EQ(c.train.seed, 9u);
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.mfcc.num_ceps, 20);
  EXPECT_EQ(c.gmm.num_components, 8);
  EXPECT_EQ(c.gmm.n_init, 2);
  EXPECT_EQ(c.map.relevance_factor, 8.5);
  EXPECT_EQ(c.train.epochs, 12);
  EXPECT_EQ(c.train.hidden_dims, (std::vector<int>{64, 32}));
  EXPECT_EQ(c.embedding.accumulation, Accumulation::kMean);
  EXPECT_EQ(c.min_utterances, 4);
  EXPECT_EQ(c.threshold, -0.25);
  EXPECT_FALSE(c.ubm_ratio);
  EXPECT_TRUE(c.per_subject_average);
  EXPECT_EQ(c.score_normalization, ScoreNormalization::kSum);
}

TEST(RunConfigTest, CanonicalTextRoundTrips) {
  RunConfig c;
  c.manifest = "/x/y.csv";
  c.backend = Backend::kDnn;
  c.threshold = 0.125;
  c.map.relevance_factor = 0.1;
  c.ApplySeed(3);
  const std::string text = c.ToText();
  EXPECT_EQ(ParseRunConfig(text).ToText(), text);
  RunConfig d = c;
  d.gmm.rel_tol = 2e-6;
  EXPECT_NE(d.ToText(), text);
}

TEST(RunConfigTest, RejectsUnknownAndMalformed) {
  EXPECT_EQ(CodeOf([] { ParseRunConfig("bogus = 1\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] { ParseRunConfig("[gmm]\nnum_componentz = 3\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] { ParseRunConfig("seed 3\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] { ParseRunConfig("[gmm]\nnum_components = many\n"); }),
            ErrorCode::kParseError);
  EXPECT_TRUE(CodeOf([] { ParseRunConfig("backend = \"svm\"\n"); }).has_value());
}

TEST(RunConfigTest, RelativePathsResolveAgainstConfigDir) {
  const fs::path dir = Scratch("config_paths");
  {
    std::ofstream out(dir / "run.toml");
    out << "manifest = \"corpus/manifest.csv\"\nout_dir = \"out\"\n";
  }
  const RunConfig c = LoadRunConfig(dir / "run.toml");
  EXPECT_EQ(c.manifest, dir / "corpus/manifest.csv");
  EXPECT_EQ(c.out_dir, dir / "out");
  EXPECT_EQ(CodeOf([&] { LoadRunConfig(dir / "absent.toml"); }), ErrorCode::kMissingFile);
}

TEST(PipelineTest, GmmBackendEndToEnd) {
  const RunConfig c = SmallRun(Backend::kGmm, "pipe_gmm");
  const TrainOutcome t = CmdTrain(c);
  EXPECT_FALSE(t.model_path.has_value());
  EXPECT_TRUE(fs::exists(c.out_dir / "run_meta_train.json"));
  const Registry reg = CmdEnroll(c);
  EXPECT_EQ(reg.size(), 3u);
  const Evaluation ev = CmdEvaluate(c);
  EXPECT_EQ(ev.report.num_tests, 3u);
  EXPECT_EQ(ev.report.num_genuine, 3u);
  EXPECT_EQ(ev.report.num_impostor, 6u);
  for (const char* f : {"registry.json", "report.json", "scores.csv", "roc.csv",
                        "run_meta_enroll.json", "run_meta_evaluate.json"}) {
    EXPECT_TRUE(fs::exists(c.out_dir / f)) << f;
  }
  const nlohmann::json meta = ReadJsonFile(c.out_dir / "run_meta_train.json");
  EXPECT_EQ(meta.at("seed"), 5);
  EXPECT_EQ(meta.at("backend"), "gmm");
  EXPECT_EQ(meta.at("config_hash").get<std::string>().size(), 64u);
}

TEST(PipelineTest, SameSeedRerunIsByteIdentical) {
  for (Backend b : {Backend::kGmmUbm, Backend::kDnn}) {
    const std::string name = BackendName(b);
    const RunConfig first = SmallRun(b, "pipe_rerun_a_" + name);
    RunConfig second = SmallRun(b, "pipe_rerun_b_" + name);
    second.threads = 2;
    RunPipeline(first);
    RunPipeline(second);
    for (const char* f : {"report.json", "scores.csv", "roc.csv", "registry.json"}) {
      EXPECT_EQ(Slurp(first.out_dir / f), Slurp(second.out_dir / f)) << name << " " << f;
    }
  }
}

TEST(PipelineTest, ModelArtifactsAreWritten) {
  const RunConfig ubm = SmallRun(Backend::kGmmUbm, "pipe_ubm_artifact");
  const TrainOutcome t = CmdTrain(ubm);
  ASSERT_TRUE(t.model_path.has_value());
  EXPECT_EQ(*t.model_path, UbmPath(ubm));
  EXPECT_EQ(UbmFromJson(ReadJsonFile(UbmPath(ubm))).Fingerprint(), t.fingerprint);
}

TEST(PipelineTest, EnrollNeedsTrainedModel) {
  const RunConfig c = SmallRun(Backend::kGmmUbm, "pipe_untrained");
  EXPECT_EQ(CodeOf([&] { CmdEnroll(c); }), ErrorCode::kMissingFile);
}

TEST(PipelineTest, FeatureMismatchRejected) {
  RunConfig c = SmallRun(Backend::kGmm, "pipe_mismatch");
  CmdEnroll(c);
  c.mfcc.num_ceps = 13;
  EXPECT_EQ(CodeOf([&] { CmdEvaluate(c); }), ErrorCode::kInvalidArgument);
}

TEST(PipelineTest, ComponentSweepWritesPerK) {
  const RunConfig c = SmallRun(Backend::kGmm, "pipe_sweep");
  const auto rows = RunComponentSweep(c, {1, 2});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].num_components, 1);
  EXPECT_TRUE(fs::exists(c.out_dir / "k2" / "report.json"));
  RunConfig dnn = c;
  dnn.backend = Backend::kDnn;
  EXPECT_EQ(CodeOf([&] { RunComponentSweep(dnn, {1}); }), ErrorCode::kInvalidArgument);
}

TEST(PipelineTest, ExtractAllNamesBadFile) {
  const fs::path dir = Scratch("pipe_badwav");
  { std::ofstream(dir / "bad.wav") << "not a wav"; }
  DatasetManifest m;
  m.records.push_back({"s", 0, dir / "bad.wav", 1.0});
  try {
    ExtractAll(m, m.records, MfccExtractor(MfccConfig{}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad.wav"), std::string::npos);
  }
}

// CLI smoke tests run the built executable.
int RunCli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(SNOREID_CLI_PATH) + " " + args + " > " + log.string() + " 2> " + log.string() + ".err";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, RunIdentifyVerifyAndDump) {
  const fs::path dir = Scratch("cli");
  const fs::path log = dir / "log.txt";
  ASSERT_EQ(RunCli("synth --out-dir " + (dir / "corpus").string() +
                       " --subjects 3 --duration 1 --seed 11",
                   log), 0) << Slurp(log);
  const std::string common = "--manifest " + (dir / "corpus/manifest.csv").string() +
                             " --out-dir " + (dir / "out").string() + " --backend gmm --components 4";
  ASSERT_EQ(RunCli("run " + common + " --seed 5", log), 0) << Slurp(log);
  EXPECT_NE(Slurp(log).find("identification"), std::string::npos) << Slurp(log);
  EXPECT_TRUE(fs::exists(dir / "out/report.json"));

  const DatasetManifest m = LoadManifest(dir / "corpus/manifest.csv");
  const fs::path any = m.records.front().audio_path;
  const std::string subject = m.records.front().subject_id;
  EXPECT_EQ(RunCli("identify " + common + " --wav " + any.string(), log), 0) << Slurp(log);
  EXPECT_EQ(Slurp(log).rfind(subject + "\n", 0), 0u) << Slurp(log);
  EXPECT_EQ(RunCli("verify " + common + " --wav " + any.string() + " --claim " + subject +
                       " --threshold -1e9", log), 0);
  EXPECT_EQ(Slurp(log).rfind("accept", 0), 0u) << Slurp(log);
  ASSERT_EQ(RunCli("dump-features --wav " + any.string() + " --out " +
                       (dir / "f.csv").string(), log), 0) << Slurp(log);
  EXPECT_EQ(Slurp(dir / "f.csv").rfind("c0,c1,", 0), 0u);
}

TEST(CliTest, ErrorsExitNonZero) {
  const fs::path dir = Scratch("cli_err");
  const fs::path log = dir / "log.txt";
  EXPECT_NE(RunCli("run --manifest " + (dir / "missing.csv").string(), log), 0);
  const std::string err = Slurp(log.string() + ".err");
  EXPECT_EQ(err.rfind("snoreid: ", 0), 0u) << err;
  EXPECT_NE(RunCli("run --backend svm --manifest x.csv", log), 0);
  EXPECT_NE(RunCli("frobnicate", log), 0);
}

}  // namespace
}  // namespace snoreid
