#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "ctcd/codec/codec.hpp"
#include "ctcd/common/error.hpp"
#include "ctcd/eval/experiment.hpp"
#include "ctcd/eval/metrics.hpp"
#include "ctcd/eval/plot.hpp"
#include "ctcd/eval/records.hpp"
#include "test_util.hpp"

namespace ctcd::eval {
namespace {

MetricRecord record(std::string method, double snr, std::string metric, double value) {
  MetricRecord r;
  r.experiment_id = "exp";
  r.method = std::move(method);
  r.scene_id = "awgn";
  r.snr_db = snr;
  r.metric = std::move(metric);
  r.value = value;
  r.n = 10;
  r.seed = 7;
  return r;
}

TEST(Records, FormatParseRoundTripIsExact) {
  std::vector<MetricRecord> rs{record("LS", 0.0, "psnr_db", 21.123456789012345),
                               record("LMMSE", 5.5, "ssim", 0.1 + 0.2),
                               record("CDIFFUSION", -3, "nmse_db", -17.000000000000004)};
  const auto text = format_records(rs);
  EXPECT_EQ(text.rfind(std::string(kRecordHeader) + "\n", 0), 0u);
  EXPECT_EQ(parse_records(text), rs);
}

TEST(Records, InfinitePsnrBecomesSentinel) {
  std::vector<MetricRecord> rs{record("PERFECT", 20, "psnr_db", std::numeric_limits<double>::infinity())};
  const auto back = parse_records(format_records(rs));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].value, kPsnrIdenticalSentinel);
  EXPECT_EQ(kPsnrIdenticalSentinel, 999.0);
}

TEST(Records, ValidateRejectsBadFields) {
  auto r = record("LS", 0, "psnr_db", 20);
  EXPECT_NO_THROW(r.validate());
  r.metric = "mse";
  EXPECT_THROW(r.validate(), InputError);
  r = record("LS", 0, "ssim", 1.5);
  EXPECT_THROW(r.validate(), InputError);
  r = record("LS", 0, "psnr_db", 20);
  r.n = 0;
  EXPECT_THROW(r.validate(), InputError);
  r = record("L,S", 0, "psnr_db", 20);
  EXPECT_THROW(r.validate(), InputError);
  r = record("LS", 0, "nmse_db", std::nan(""));
  EXPECT_THROW(r.validate(), InputError);
}

TEST(Records, ParseRejectsMalformedText) {
  EXPECT_THROW(parse_records("wrong,header\n"), InputError);
  EXPECT_THROW(parse_records(std::string(kRecordHeader) + "\nexp,LS,awgn,zero,psnr_db,1,1,1\n"), InputError);
  EXPECT_THROW(parse_records(std::string(kRecordHeader) + "\nexp,LS,awgn,0,psnr_db,1\n"), InputError);
}

TEST(Records, ReadMissingOrEmptyNamesPath) {
  testing::TempDir dir;
  try {
    read_records(dir / "absent.csv");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("absent.csv"), std::string::npos);
  }
  std::ofstream(dir / "empty.csv") << "";
  EXPECT_THROW(read_records(dir / "empty.csv"), InputError);
  std::ofstream(dir / "header.csv") << kRecordHeader << "\n";
  EXPECT_THROW(read_records(dir / "header.csv"), InputError);
}

TEST(Plot, EmptyRecordsRaiseAndWriteNothing) {
  testing::TempDir dir;
  EXPECT_THROW(write_plots({}, dir / "plots"), InputError);
  EXPECT_FALSE(std::filesystem::exists(dir / "plots"));
}

TEST(Plot, OneFilePerExperiment) {
  testing::TempDir dir;
  auto a = record("LS", 0, "psnr_db", 20);
  auto b = record("LS", 10, "psnr_db", 25);
  auto c = record("LS", 0, "nmse_db", -10);
  c.experiment_id = "other";
  const auto files = write_plots({a, b, c}, dir / "plots");
  ASSERT_EQ(files.size(), 2u);
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(f));
  const auto svg = render_svg({a, b}, "t");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("LS"), std::string::npos);
}

class ExperimentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir;
    codec::CodecConfig c;
    c.channels_per_stage = {8, 16};
    const codec::SemanticCodec codec(c, 5);
    nn::Archive a;
    codec::store_codec(a, codec);
    nn::save_archive(a, *dir_ / "codec.ckpt");
  }
  static void TearDownTestSuite() { delete dir_; }

  static ExperimentConfig config() {
    ExperimentConfig c;
    c.id = "unit";
    c.methods = {MethodSpec{"", estimator::Method::PERFECT, {}}, MethodSpec{"", estimator::Method::LS, {}}};
    c.metrics = {"psnr_db"};
    c.codec = *dir_ / "codec.ckpt";
    c.num_images = 3;
    c.num_draws = 1;
    return c;
  }

  static testing::TempDir* dir_;
};
testing::TempDir* ExperimentTest::dir_ = nullptr;

TEST_F(ExperimentTest, GridTimesMethodsRecords) {
  testing::TempDir out;
  const auto r = run_experiment(config(), out.path());
  ASSERT_EQ(r.records.size(), 10u);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.experiment_id, "unit");
    EXPECT_EQ(rec.metric, "psnr_db");
    EXPECT_EQ(rec.n, 3u);
    EXPECT_NO_THROW(rec.validate());
  }
  EXPECT_EQ(r.records[0].method, "PERFECT");
  EXPECT_EQ(r.records[5].method, "LS");
  const auto disk = read_records(out / "records.csv");
  EXPECT_EQ(disk.size(), 10u);
  EXPECT_TRUE(std::filesystem::exists(out / "unit.svg"));
}

TEST_F(ExperimentTest, DeterministicAndIndependentOfJobs) {
  testing::TempDir a, b;
  auto c = config();
  const auto r1 = run_experiment(c, a.path());
  c.jobs = 3;
  const auto r2 = run_experiment(c, b.path());
  ASSERT_EQ(r1.records.size(), r2.records.size());
  for (std::size_t i = 0; i < r1.records.size(); ++i) EXPECT_EQ(r1.records[i], r2.records[i]);
}

TEST_F(ExperimentTest, PerfectCsiHasLowerNmseThanLs) {
  testing::TempDir out;
  auto c = config();
  c.metrics = {"nmse_db"};
  const auto r = run_experiment(c, out.path());
  ASSERT_EQ(r.records.size(), 10u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.records[i].method, "PERFECT");
    EXPECT_EQ(r.records[i + 5].method, "LS");
    EXPECT_LT(r.records[i].value, r.records[i + 5].value) << r.records[i].snr_db;
  }
  // LS error falls as the pilots get cleaner.
  EXPECT_GT(r.records[5].value, r.records[9].value + 10.0);
}

TEST_F(ExperimentTest, MissingCheckpointNamesPath) {
  testing::TempDir out;
  auto c = config();
  c.methods.push_back(MethodSpec{"", estimator::Method::CDIFFUSION, out / "nope.ckpt"});
  try {
    run_experiment(c, out.path());
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.ckpt"), std::string::npos);
  }
  EXPECT_THROW(load_estimator_checkpoint(out / "nope.ckpt"), InputError);
}

TEST_F(ExperimentTest, ValidationErrors) {
  auto c = config();
  c.snr_grid_db = {10, 5};
  EXPECT_THROW(c.validate(), ConfigError);
  c = config();
  c.snr_grid_db.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = config();
  c.methods.push_back(MethodSpec{"", estimator::Method::LS, {}});
  EXPECT_THROW(c.validate(), ConfigError);
  c = config();
  c.methods.push_back(MethodSpec{"", estimator::Method::CDIFFUSION, {}});
  EXPECT_THROW(c.validate(), ConfigError);
  c = config();
  c.scenes = {"urban"};
  EXPECT_THROW(c.validate(), ConfigError);
  c = config();
  c.codec.clear();
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace ctcd::eval
