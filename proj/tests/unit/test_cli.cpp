#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "ctcd/channel/csi_dataset.hpp"
#include "ctcd/common/bytes.hpp"
#include "ctcd/eval/records.hpp"
#include "test_util.hpp"

namespace ctcd::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kSubcommands{"gen-data", "train-codec", "train-channel", "pretrain-refiner",
                                            "refine",   "evaluate",    "simulate-drive", "plot"};

struct Result {
  int code = -1;
  std::string output;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

/// Runs the installed binary from the source tree with CTCD_OUT_DIR set to `root`.
Result ctcd(const fs::path& root, const std::string& args) {
  const std::string cmd = "cd " + quote(testing::source_dir().string()) + " && CTCD_OUT_DIR=" +
                          quote(root.string()) + " " + quote(CTCD_BINARY) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(CliHelp, EveryOptionIsDocumented) {
  Options o;
  const auto app = make_app(o);
  std::vector<std::string> names;
  for (const auto* sub : app->get_subcommands({})) {
    names.push_back(sub->get_name());
    EXPECT_FALSE(sub->get_description().empty()) << sub->get_name();
    for (const auto* opt : sub->get_options())
      EXPECT_FALSE(opt->get_description().empty()) << sub->get_name() << " " << opt->get_name();
  }
  EXPECT_EQ(names, kSubcommands);
}

TEST(CliHelp, HelpListsSubcommandsAndEnvironment) {
  testing::TempDir root;
  const auto top = ctcd(root.path(), "--help");
  EXPECT_EQ(top.code, 0);
  for (const auto& s : kSubcommands) EXPECT_NE(top.output.find(s), std::string::npos) << s;
  EXPECT_NE(top.output.find("CTCD_OUT_DIR"), std::string::npos);
  for (const auto& s : kSubcommands) {
    const auto h = ctcd(root.path(), s + " --help");
    EXPECT_EQ(h.code, 0) << s;
    EXPECT_NE(h.output.find("--config"), std::string::npos) << s;
  }
}

TEST(CliExitCodes, UsageAndValidation) {
  testing::TempDir root;
  EXPECT_EQ(ctcd(root.path(), "").code, kExitUsage);
  EXPECT_EQ(ctcd(root.path(), "no-such-command").code, kExitUsage);
  EXPECT_EQ(ctcd(root.path(), "gen-data --scenes 0").code, kExitUsage);
  EXPECT_EQ(ctcd(root.path(), "gen-data --realizations notanumber").code, kExitUsage);
  EXPECT_EQ(ctcd(root.path(), "refine").code, kExitUsage);  // --scene is required
  EXPECT_EQ(ctcd(root.path(), "gen-data --config /nonexistent/c.yaml").code, kExitUsage);
  EXPECT_FALSE(fs::exists(root / "data"));
}

TEST(CliExitCodes, MissingDatasetNamesPath) {
  testing::TempDir root;
  const auto r = ctcd(root.path(), "train-channel --dataset " + quote((root / "absent.bin").string()));
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.output.find("absent.bin"), std::string::npos) << r.output;
}

TEST(CliExitCodes, CorruptDatasetIsValidationError) {
  testing::TempDir root;
  std::ofstream(root / "bad.bin") << "garbage";
  const auto r = ctcd(root.path(), "train-channel --dataset " + quote((root / "bad.bin").string()));
  EXPECT_EQ(r.code, kExitUsage);
}

TEST(CliGenData, ReproducibleAndGuarded) {
  testing::TempDir root;
  const auto a = root / "a.bin";
  const auto b = root / "b.bin";
  const std::string flags = " --scenes 3 --realizations 1000 --seed 7";
  ASSERT_EQ(ctcd(root.path(), "gen-data --out " + quote(a.string()) + flags).code, kExitOk);
  ASSERT_EQ(ctcd(root.path(), "gen-data --out " + quote(b.string()) + flags).code, kExitOk);
  const auto ds = channel::import_csi(a);
  EXPECT_EQ(ds.profiles.size(), 3u);
  EXPECT_EQ(ds.realizations.size(), 3000u);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(channel::split_sidecar_path(a)), slurp(channel::split_sidecar_path(b)));

  EXPECT_EQ(ctcd(root.path(), "gen-data --out " + quote(a.string()) + flags).code, kExitUsage);
  EXPECT_EQ(ctcd(root.path(), "gen-data --force --out " + quote(a.string()) + flags).code, kExitOk);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(CliGenData, DefaultPathUsesOutputRoot) {
  testing::TempDir root;
  ASSERT_EQ(ctcd(root.path(), "gen-data --scenes 1 --realizations 20").code, kExitOk);
  EXPECT_TRUE(fs::exists(root / "data" / "csi.bin"));
  EXPECT_TRUE(fs::exists(root / "data" / "manifest_gen-data.json"));
}

TEST(CliPlot, EmptyRecordsProduceNoOutput) {
  testing::TempDir root;
  std::ofstream(root / "empty.csv") << "";
  const auto r = ctcd(root.path(), "plot --records " + quote((root / "empty.csv").string()) + " --out " +
                                       quote((root / "plots").string()));
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(fs::exists(root / "plots"));
}

// Shared miniature pipeline: every training step is cut to seconds.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new testing::TempDir;
    std::ofstream(*root_ / "mini.yaml") << R"(output_dir: unused
dataset:
  realizations_per_scene: 200
codec:
  model:
    channels_per_stage: [8, 16]
    epochs: 1
  images:
    train_count: 16
    validation_count: 4
estimator:
  denoiser: {width: 32, blocks: 1, time_frequencies: 4}
  train: {steps: 20, batch: 32, validation_rows: 32, log_every: 10}
refiner:
  pretrain: {steps: 20, batch: 32, validation_rows: 32, log_every: 10}
  refine: {step_budget: 5, batch: 16}
drive:
  measurement_spacing: 1000.0
  images_per_measurement: 1
  num_draws: 1
experiments:
  - id: grid
    methods: [{method: PERFECT}, {method: LS}]
    scenes: [awgn]
    metrics: [psnr_db]
    num_images: 2
    num_draws: 1
)";
    cfg_ = " --config " + quote((*root_ / "mini.yaml").string());
    ok_ = ctcd(root_->path(), "gen-data" + cfg_).code == kExitOk &&
          ctcd(root_->path(), "train-codec" + cfg_).code == kExitOk &&
          ctcd(root_->path(), "pretrain-refiner" + cfg_).code == kExitOk;
  }
  static void TearDownTestSuite() { delete root_; }

  static testing::TempDir* root_;
  static std::string cfg_;
  static bool ok_;
};
testing::TempDir* CliPipeline::root_ = nullptr;
std::string CliPipeline::cfg_;
bool CliPipeline::ok_ = false;

TEST_F(CliPipeline, ManifestListsOneCheckpoint) {
  ASSERT_TRUE(ok_);
  const auto j = nlohmann::json::parse(slurp(*root_ / "checkpoints" / "manifest_train-codec.json"));
  ASSERT_EQ(j["checkpoints"].size(), 1u);
  EXPECT_NE(j["checkpoints"][0].get<std::string>().find("codec.ckpt"), std::string::npos);
  EXPECT_FALSE(j["input_hash"].get<std::string>().empty());
  EXPECT_EQ(j["subcommand"], "train-codec");
}

TEST_F(CliPipeline, EvaluateWritesGridTimesMethodsRecords) {
  ASSERT_TRUE(ok_);
  const auto r = ctcd(root_->path(), "evaluate" + cfg_);
  ASSERT_EQ(r.code, kExitOk) << r.output;
  const auto records = eval::read_records(*root_ / "eval" / "grid" / "records.csv");
  EXPECT_EQ(records.size(), 10u);
  EXPECT_EQ(ctcd(root_->path(), "evaluate --experiment nope" + cfg_).code, kExitUsage);

  const auto p = ctcd(root_->path(), "plot --records " + quote((*root_ / "eval" / "grid" / "records.csv").string()));
  EXPECT_EQ(p.code, kExitOk) << p.output;
  EXPECT_TRUE(fs::exists(*root_ / "plots" / "grid.svg"));
}

TEST_F(CliPipeline, RefineAndTrainChannel) {
  ASSERT_TRUE(ok_);
  auto r = ctcd(root_->path(), "refine --scene bridge" + cfg_);
  ASSERT_EQ(r.code, kExitOk) << r.output;
  EXPECT_TRUE(fs::exists(*root_ / "checkpoints" / "refined_bridge.ckpt"));
  r = ctcd(root_->path(), "train-channel --steps 5" + cfg_);
  ASSERT_EQ(r.code, kExitOk) << r.output;
  EXPECT_TRUE(fs::exists(*root_ / "checkpoints" / "estimator.ckpt"));
  EXPECT_EQ(ctcd(root_->path(), "refine --scene atlantis" + cfg_).code, kExitUsage);
}

TEST_F(CliPipeline, DemoDriveHasExactlyOneRefinement) {
  ASSERT_TRUE(ok_);
  const auto r = ctcd(root_->path(), "simulate-drive --route data/demo/route.yaml --map data/demo/map.yaml" + cfg_);
  ASSERT_EQ(r.code, kExitOk) << r.output;
  const auto summary = nlohmann::json::parse(slurp(*root_ / "drive" / "drive_summary.json"));
  EXPECT_EQ(summary["refinement_events"], 1);
  EXPECT_EQ(summary["safety_violations"], 0);
  EXPECT_TRUE(fs::exists(*root_ / "drive" / "timeline.csv"));
}

TEST(CliTrainCodec, OneEpochSmokeRunIsFast) {
  testing::TempDir root;
  std::ofstream(root / "awgn.yaml") << "codec:\n  train_scene: awgn\n";
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = ctcd(root.path(), "train-codec --epochs 1 --images data/demo/images --config " +
                                       quote((root / "awgn.yaml").string()));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(r.code, kExitOk) << r.output;
  EXPECT_LT(seconds, 60.0);
  EXPECT_TRUE(fs::exists(root / "checkpoints" / "codec.ckpt"));
}

}  // namespace
}  // namespace ctcd::cli
