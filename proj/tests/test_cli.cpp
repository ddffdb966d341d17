#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "avvp/cli.hpp"
#include "avvp/trainer.hpp"
#include "test_util.hpp"

using namespace avvp;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string error_kind(const CliRun& r) {
  const auto line = r.err.substr(0, r.err.find('\n'));
  return nlohmann::json::parse(line).at("error").get<std::string>();
}

std::vector<std::string> synth_args(const fs::path& out) {
  return {"synth", "--out", out.string(), "--videos", "12", "--test-videos", "4",
          "--classes", "3", "--d-audio", "5", "--d-visual", "6", "--snippets", "6",
          "--seed", "2"};
}

}  // namespace

TEST(Cli, UnknownFlagIsJsonError) {
  const CliRun r = cli({"synth", "--out", "x", "--no-such-flag"});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(error_kind(r), "usage_error");
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, SynthIsByteReproducibleAndRefusesNonEmptyDir) {
  testutil::TempDir dir;
  const fs::path a = dir.path() / "a", b = dir.path() / "b";
  ASSERT_EQ(cli(synth_args(a)).code, 0);
  ASSERT_EQ(cli(synth_args(b)).code, 0);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path other = b / fs::relative(e.path(), a);
    EXPECT_EQ(testutil::read_bytes(e.path()), testutil::read_bytes(other)) << e.path();
  }
  EXPECT_TRUE(fs::exists(a / "train" / "manifest.tsv"));
  EXPECT_TRUE(fs::exists(a / "test" / "annotations.csv"));

  const CliRun again = cli(synth_args(a));
  EXPECT_NE(again.code, 0);
  EXPECT_EQ(error_kind(again), "usage_error");
  auto forced = synth_args(a);
  forced.push_back("--force");
  EXPECT_EQ(cli(forced).code, 0);
}

TEST(Cli, TrainParseEvalRoundTrip) {
  testutil::TempDir dir;
  const fs::path data = dir.path() / "d", run = dir.path() / "run";
  ASSERT_EQ(cli(synth_args(data)).code, 0);
  const CliRun t = cli({"train", "--data", (data / "train").string(), "--val",
                     (data / "test").string(), "--out", run.string(), "--epochs", "2",
                     "--batch-size", "4", "--width", "8", "--lr", "0.01",
                     "--checkpoint-every", "1"});
  ASSERT_EQ(t.code, 0) << t.err;
  for (const char* f : {"config.snapshot", "history.csv", "steps.csv", "ckpt_epoch_1",
                        "ckpt_epoch_2", "ckpt_best", "final_metrics.csv"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  const std::string steps = testutil::read_bytes(run / "steps.csv");
  EXPECT_EQ(steps.substr(0, steps.find('\n')), "epoch,step,l_wsl,l_g_a,l_g_v,total");
  // 12 training videos in batches of 4, two epochs
  EXPECT_EQ(std::count(steps.begin(), steps.end(), '\n'), 7);

  const fs::path segs = dir.path() / "segs.csv";
  ASSERT_EQ(cli({"parse", "--data", (data / "test").string(), "--checkpoint",
                 (run / "ckpt_epoch_2").string(), "--out", segs.string()})
                .code,
            0);
  const CliRun e1 = cli({"eval", "--data", (data / "test").string(), "--checkpoint",
                      (run / "ckpt_epoch_2").string()});
  const CliRun e2 = cli({"eval", "--data", (data / "test").string(), "--pred", segs.string()});
  ASSERT_EQ(e1.code, 0) << e1.err;
  ASSERT_EQ(e2.code, 0) << e2.err;
  EXPECT_EQ(e1.out, e2.out);
  EXPECT_EQ(e1.out, testutil::read_bytes(run / "final_metrics.csv"));

  const CliRun gt = cli({"eval", "--data", (data / "test").string(), "--pred",
                      (data / "test" / "annotations.csv").string()});
  EXPECT_NE(gt.out.find("TypeAV,1.000000,1.000000"), std::string::npos) << gt.out;
}

TEST(Cli, ConfigFileThenFlagsPrecedence) {
  testutil::TempDir dir;
  const fs::path data = dir.path() / "d";
  ASSERT_EQ(cli(synth_args(data)).code, 0);
  const fs::path cfg = dir.path() / "cfg.json";
  std::ofstream(cfg) << R"({"model": {"width": 6}, "train": {"epochs": 1, "batch_size": 3, "lr0": 0.002}})";
  const fs::path run = dir.path() / "run";
  ASSERT_EQ(cli({"train", "--data", (data / "train").string(), "--out", run.string(), "--config",
                 cfg.string(), "--lr", "0.005"})
                .code,
            0);
  const auto snap = nlohmann::json::parse(testutil::read_bytes(run / "config.snapshot"));
  EXPECT_EQ(snap["model"]["width"], 6);
  EXPECT_EQ(snap["train"]["batch_size"], 3);
  EXPECT_EQ(snap["train"]["lr0"], 0.005);
  EXPECT_EQ(snap["train"]["epochs"], 1);
  EXPECT_EQ(snap["train"]["lr_decay"], 0.1);

  std::ofstream(cfg) << R"({"train": {"epochz": 1}})";
  const CliRun bad = cli({"train", "--data", (data / "train").string(), "--out",
                       (dir.path() / "r2").string(), "--config", cfg.string()});
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.err.find("epochz"), std::string::npos);
}

TEST(Cli, ResumeMatchesUninterruptedRun) {
  testutil::TempDir dir;
  const fs::path data = dir.path() / "d";
  ASSERT_EQ(cli(synth_args(data)).code, 0);
  const std::vector<std::string> common{"--data", (data / "train").string(), "--width", "8",
                                        "--batch-size", "4", "--lr", "0.01", "--lr-step", "2"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a{"train"};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return cli(a);
  };
  ASSERT_EQ(with({"--out", (dir.path() / "full").string(), "--epochs", "4"}).code, 0);
  ASSERT_EQ(with({"--out", (dir.path() / "half").string(), "--epochs", "2"}).code, 0);
  ASSERT_EQ(with({"--out", (dir.path() / "rest").string(), "--epochs", "4", "--resume",
                  (dir.path() / "half" / "ckpt_epoch_2").string()})
                .code,
            0);
  const Checkpoint a = load_checkpoint(dir.path() / "full" / "ckpt_epoch_4");
  const Checkpoint b = load_checkpoint(dir.path() / "rest" / "ckpt_epoch_4");
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.adam, b.adam);
}

TEST(Cli, MissingInputsReportIoOrFormatErrors) {
  testutil::TempDir dir;
  const CliRun r = cli({"eval", "--data", (dir.path() / "nope").string(), "--pred", "x.csv"});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(error_kind(r).empty());
  const fs::path junk = dir.path() / "junk";
  std::ofstream(junk) << "not a checkpoint";
  const CliRun c = cli({"parse", "--data", dir.path().string(), "--checkpoint", junk.string()});
  EXPECT_EQ(error_kind(c), "bad_magic");
}

TEST(Cli, GradcheckPasses) {
  const CliRun r = cli({"gradcheck", "--seed", "3", "--t", "4", "--d", "8", "--d-a", "6",
                     "--classes", "3", "--batch", "2"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}
