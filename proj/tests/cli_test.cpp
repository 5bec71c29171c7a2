#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "stacknet/checkpoint.hpp"
#include "stacknet/errors.hpp"
#include "stacknet/features.hpp"
#include "test_util.hpp"

namespace stacknet {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Value printed after `key ` on its own line of eval output.
double field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string k;
  std::string v;
  while (in >> k >> v)
    if (k == key) return std::stod(v);
  ADD_FAILURE() << "no '" << key << "' in:\n" << text;
  return 0.0;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv(cli::kSeedEnv);
    write_file(dir / "gen.cfg",
               "output_dir = " + (dir / "data").string() +
                   "\nnum_monophones = 3\nsenones_per_monophone = 2\nfeature_dim = 4\n"
                   "train_utterances = 6\ndev_utterances = 3\ntest_utterances = 2\n"
                   "min_frames = 10\nmax_frames = 20\nseed = 5\n");
    ASSERT_EQ(run_cli({"gen-data", (dir / "gen.cfg").string()}).code, 0);
  }

  std::string common(const std::string& out_name) const {
    return "train_corpus = " + (dir / "data/train.corpus").string() +
           "\ndev_corpus = " + (dir / "data/dev.corpus").string() +
           "\nsenone_map = " + (dir / "data/senones.map").string() +
           "\noutput_dir = " + (dir / out_name).string() +
           "\nhidden_layers = 1\nhidden_width = 8\nsplice_left = 2\nsplice_right = 2\n"
           "learning_rate = 0.05\nminibatch_size = 8\nseed = 3\nlog_wall_time = false\n";
  }

  Result train(const std::string& name, const std::string& body) {
    const fs::path cfg = dir / (name + ".cfg");
    write_file(cfg, body + common(name));
    return run_cli({"train", cfg.string()});
  }

  void train_baseline() {
    auto r = train("base", "model = baseline\nepochs = 3\n");
    ASSERT_EQ(r.code, 0) << r.err;
  }

  std::string base_ckpt() const { return (dir / "base/final.ckpt").string(); }

  TempDir dir{"cli"};
};

TEST_F(CliTest, GenDataIsDeterministicAndCreatesDirectories) {
  std::string text = read_file(dir / "gen.cfg");
  const std::string nested = (dir / "a/b/c").string();
  text.replace(text.find((dir / "data").string()), (dir / "data").string().size(), nested);
  write_file(dir / "gen2.cfg", text);
  ASSERT_EQ(run_cli({"gen-data", (dir / "gen2.cfg").string()}).code, 0);
  for (const char* f : {"train.corpus", "dev.corpus", "test.corpus", "senones.map"})
    EXPECT_EQ(read_file(dir / "data" / f), read_file(fs::path(nested) / f)) << f;
}

TEST_F(CliTest, InvalidProbabilityNamesTheField) {
  write_file(dir / "bad.cfg", "output_dir = " + (dir / "x").string() + "\nself_transition_prob = 1.5\n");
  auto r = run_cli({"gen-data", (dir / "bad.cfg").string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("self_transition_prob"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownKeyIsAnError) {
  auto r = train("typo", "model = baseline\nepochs = 1\nlearnig_rate = 0.1\n");
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("learnig_rate"), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"eval", "--corpus", "x"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliTest, MissingInputFileIsDataError) {
  write_file(dir / "m.cfg", "model = baseline\ntrain_corpus = /nonexistent\ndev_corpus = /nonexistent\n"
                            "output_dir = " + (dir / "m").string() + "\n");
  EXPECT_EQ(run_cli({"train", (dir / "m.cfg").string()}).code, cli::kExitData);
}

TEST_F(CliTest, TrainWritesCsvAndCheckpoints) {
  train_baseline();
  auto rows = cli::read_metrics_csv(dir / "base/metrics.csv");
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].epoch, i);
    EXPECT_GE(rows[i].train_ce, 0.0);
    EXPECT_GE(rows[i].dev_acc, 0.0);
    EXPECT_LE(rows[i].dev_acc, 1.0);
    EXPECT_EQ(rows[i].seconds, 0.0);
  }
  EXPECT_LT(rows.back().train_ce, rows.front().train_ce);
  EXPECT_TRUE(fs::exists(dir / "base/best.ckpt"));
  EXPECT_EQ(read_file(dir / "base/metrics.csv").substr(0, 38), std::string(cli::kMetricsHeader) + "\n");
}

TEST_F(CliTest, SameSeedGivesIdenticalCsv) {
  train_baseline();
  ASSERT_EQ(train("base_again", "model = baseline\nepochs = 3\n").code, 0);
  EXPECT_EQ(read_file(dir / "base/metrics.csv"), read_file(dir / "base_again/metrics.csv"));
  EXPECT_EQ(read_file(dir / "base/final.ckpt"), read_file(dir / "base_again/final.ckpt"));
}

TEST_F(CliTest, SeedEnvironmentOverridesConfig) {
  train_baseline();
  setenv(cli::kSeedEnv, "3", 1);
  ASSERT_EQ(train("env_same", "model = baseline\nepochs = 3\n").code, 0);
  setenv(cli::kSeedEnv, "4", 1);
  ASSERT_EQ(train("env_other", "model = baseline\nepochs = 3\n").code, 0);
  setenv(cli::kSeedEnv, "four", 1);
  EXPECT_EQ(train("env_bad", "model = baseline\nepochs = 3\n").code, cli::kExitUsage);
  unsetenv(cli::kSeedEnv);
  EXPECT_EQ(read_file(dir / "base/metrics.csv"), read_file(dir / "env_same/metrics.csv"));
  EXPECT_NE(read_file(dir / "base/metrics.csv"), read_file(dir / "env_other/metrics.csv"));
}

TEST_F(CliTest, ZeroEpochsKeepsTheCheckpoint) {
  train_baseline();
  ASSERT_EQ(train("again", "model = baseline\nepochs = 0\ninit_checkpoint = " + base_ckpt() + "\n").code, 0);
  EXPECT_EQ(read_file(base_ckpt()), read_file(dir / "again/final.ckpt"));
  ASSERT_EQ(train("rdsn0", "model = rdsn\nk = 2\nepochs = 1\n").code, 0);
  const std::string rdsn = (dir / "rdsn0/final.ckpt").string();
  ASSERT_EQ(train("rdsn1", "model = rdsn\nk = 2\nepochs = 0\ninit_checkpoint = " + rdsn + "\n").code, 0);
  EXPECT_EQ(read_file(rdsn), read_file(dir / "rdsn1/final.ckpt"));
}

TEST_F(CliTest, ZeroedWarmStartMatchesBaselineDevCe) {
  train_baseline();
  const double base_dev = cli::read_metrics_csv(dir / "base/metrics.csv").back().dev_ce;
  for (const char* model : {"rdsn", "bpsn"}) {
    auto r = train(std::string("warm_") + model, std::string("model = ") + model +
                                                     "\nk = 2\nepochs = 1\nzero_recurrent_init = true\n"
                                                     "init_checkpoint = " + base_ckpt() + "\n");
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = cli::read_metrics_csv(dir / (std::string("warm_") + model) / "metrics.csv");
    EXPECT_EQ(rows[0].dev_ce, base_dev) << model;
  }
}

TEST_F(CliTest, EvalReproducesLoggedTrainCe) {
  train_baseline();
  ASSERT_EQ(train("rdsn", "model = rdsn\nk = 2\nepochs = 2\ninit_checkpoint = " + base_ckpt() + "\n").code, 0);
  ASSERT_EQ(train("bpsn", "model = bpsn\nk = 2\nepochs = 2\ninit_checkpoint = " + base_ckpt() + "\n").code, 0);
  const std::string corpus = (dir / "data/train.corpus").string();
  const std::vector<std::string> splice = {"--splice-left", "2", "--splice-right", "2"};
  struct Case {
    std::string mode, dir;
  };
  for (const Case& c : {Case{"baseline", "base"}, Case{"rdsn", "rdsn"}, Case{"bpsn", "bpsn"}}) {
    std::vector<std::string> args = {"eval", "--checkpoint", (dir / c.dir / "final.ckpt").string(),
                                     "--corpus", corpus, "--mode", c.mode};
    args.insert(args.end(), splice.begin(), splice.end());
    auto r = run_cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const double logged = cli::read_metrics_csv(dir / c.dir / "metrics.csv").back().train_ce;
    EXPECT_NEAR(field(r.out, "mean_ce"), logged, 1e-9) << c.mode;
  }
}

TEST_F(CliTest, BpsnPassesAgreeOnSingleFrameUtterances) {
  Rng rng(17);
  Corpus c = testing::random_corpus(rng, 5, 1, 1, 4, 6);
  save_corpus(c, dir / "t1.corpus");
  ASSERT_EQ(train("rdsn", "model = rdsn\nk = 2\nepochs = 1\n").code, 0);
  auto r = run_cli({"eval", "--checkpoint", (dir / "rdsn/final.ckpt").string(), "--corpus",
                    (dir / "t1.corpus").string(), "--mode", "bpsn", "--passes", "2", "--splice-left", "2",
                    "--splice-right", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "pass1_ce"), field(r.out, "pass2_ce"));
  EXPECT_EQ(field(r.out, "frames"), 5.0);
}

TEST_F(CliTest, ShapeMismatchesFail) {
  ASSERT_EQ(train("rdsn", "model = rdsn\nk = 2\nepochs = 0\n").code, 0);
  const std::string rdsn = (dir / "rdsn/final.ckpt").string();
  const std::string corpus = (dir / "data/dev.corpus").string();
  auto r = run_cli({"eval", "--checkpoint", rdsn, "--corpus", corpus, "--mode", "baseline", "--splice-left",
                    "2", "--splice-right", "2"});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("input width"), std::string::npos) << r.err;
  // Wrong splice context.
  EXPECT_EQ(run_cli({"eval", "--checkpoint", rdsn, "--corpus", corpus, "--mode", "rdsn"}).code, cli::kExitData);
  // Resuming with a different k.
  EXPECT_EQ(train("k3", "model = rdsn\nk = 3\nepochs = 0\ninit_checkpoint = " + rdsn + "\n").code,
            cli::kExitData);
  // Baseline training from a recurrent checkpoint.
  EXPECT_EQ(train("b", "model = baseline\nepochs = 0\ninit_checkpoint = " + rdsn + "\n").code, cli::kExitData);
}

TEST_F(CliTest, PerUtteranceCsv) {
  train_baseline();
  const fs::path csv = dir / "per_utt.csv";
  auto r = run_cli({"eval", "--checkpoint", base_ckpt(), "--corpus", (dir / "data/dev.corpus").string(),
                    "--splice-left", "2", "--splice-right", "2", "--per-utterance", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(read_file(csv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "utterance,frames,mean_ce,frame_acc");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3u);
}

TEST_F(CliTest, InspectCheckpoint) {
  ASSERT_EQ(train("rdsn", "model = rdsn\nk = 2\nepochs = 0\n").code, 0);
  auto r = run_cli({"inspect-checkpoint", (dir / "rdsn/final.ckpt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "k"), 2.0);
  EXPECT_EQ(field(r.out, "M"), 3.0);
  EXPECT_EQ(field(r.out, "S"), 6.0);
  EXPECT_EQ(field(r.out, "input_dim"), 5.0 * 4 + 2 * 3);
  EXPECT_EQ(field(r.out, "layers"), 2.0);
  EXPECT_EQ(run_cli({"inspect-checkpoint", (dir / "data/train.corpus").string()}).code, cli::kExitData);
}

TEST_F(CliTest, ImportText) {
  write_file(dir / "c.txt", "u1 0 1 2\nu1 1 3 4\nu2 2 5 6\n");
  auto r = run_cli({"import-text", (dir / "c.txt").string(), (dir / "c.corpus").string(), "--senones", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  Corpus c = load_corpus(dir / "c.corpus");
  EXPECT_EQ(c.utterances.size(), 2u);
  EXPECT_EQ(c.num_senones, 4u);
  EXPECT_EQ(c.feature_dim, 2u);
}

}  // namespace
}  // namespace stacknet
