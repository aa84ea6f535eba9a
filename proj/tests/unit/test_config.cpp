#include <gtest/gtest.h>

#include <fstream>

#include "ctcd/common/error.hpp"
#include "ctcd/config/app_config.hpp"
#include "ctcd/config/manifest.hpp"
#include "test_util.hpp"

namespace ctcd::config {
namespace {

TEST(Config, DefaultYamlMirrorsBuiltIns) {
  const auto from_file = load_config(testing::source_dir() / "configs" / "default.yaml");
  EXPECT_EQ(to_json(from_file), to_json(default_config()));
}

TEST(Config, DemoConfigLoadsAndValidates) {
  const auto c = load_config(testing::source_dir() / "configs" / "demo.yaml");
  EXPECT_NO_THROW(c.validate());
  EXPECT_FALSE(c.experiments.empty());
}

TEST(Config, JsonRoundTrip) {
  const auto c = default_config();
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(Config, UnknownKeyNamesDottedPath) {
  try {
    config_from_json(parse_structured("codec:\n  bogus: 1\n"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("codec.bogus"), std::string::npos) << e.what();
  }
}

TEST(Config, WrongTypeIsConfigError) {
  EXPECT_THROW(config_from_json(parse_structured("num_pilots: eight\n")), ConfigError);
}

TEST(Config, MissingKeysKeepDefaults) {
  const auto c = config_from_json(parse_structured("num_pilots: 16\n"));
  EXPECT_EQ(c.num_pilots, 16);
  auto d = default_config();
  d.num_pilots = 16;
  EXPECT_EQ(to_json(c), to_json(d));
}

TEST(Config, MissingFileIsInputError) { EXPECT_THROW(load_config("/nonexistent/cfg.yaml"), InputError); }

TEST(Structured, ScalarTyping) {
  const auto j = parse_structured("a: 3\nb: 2.5\nc: true\nd: \"7\"\ne: text\nf: ~\ng: [1, 2]\n");
  EXPECT_TRUE(j["a"].is_number_integer());
  EXPECT_EQ(j["a"], 3);
  EXPECT_DOUBLE_EQ(j["b"].get<double>(), 2.5);
  EXPECT_EQ(j["c"], true);
  EXPECT_TRUE(j["d"].is_string());
  EXPECT_EQ(j["e"], "text");
  EXPECT_TRUE(j["f"].is_null());
  EXPECT_EQ(j["g"].size(), 2u);
}

TEST(RouteAndMap, DemoFilesParse) {
  const auto route = load_route(testing::source_dir() / "data" / "demo" / "route.yaml");
  EXPECT_DOUBLE_EQ(route.speed, 20.0);
  EXPECT_DOUBLE_EQ(route.length(), 3000.0);
  const auto map = load_scene_map(testing::source_dir() / "data" / "demo" / "map.yaml");
  EXPECT_EQ(map.default_scene_id, "urban_canyon");
  ASSERT_EQ(map.regions.size(), 1u);
  EXPECT_EQ(map.lookup({2500, 0}), "bridge");
  EXPECT_EQ(route_from_json(to_json(route)).waypoints, route.waypoints);
  EXPECT_EQ(scene_map_from_json(to_json(map)).regions[0].polygon, map.regions[0].polygon);
}

TEST(RouteAndMap, InvalidDocumentsRejected) {
  EXPECT_THROW(route_from_json(parse_structured("waypoints: [[0, 0]]\n")), ConfigError);
  EXPECT_THROW(scene_map_from_json(parse_structured(
                   "regions:\n  - scene_id: x\n    polygon: [[0, 0], [1, 1], [1, 0], [0, 1]]\n")),
               ConfigError);
}

TEST(Manifest, GitBlobHashKnownValues) {
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Manifest, HashTracksInputContent) {
  testing::TempDir dir;
  std::ofstream(dir / "in.txt") << "one";
  RunManifest m;
  m.subcommand = "test";
  m.inputs = {dir / "in.txt"};
  m.hash_inputs();
  const auto first = m.input_hash;
  m.hash_inputs();
  EXPECT_EQ(m.input_hash, first);
  std::ofstream(dir / "in.txt") << "two";
  m.hash_inputs();
  EXPECT_NE(m.input_hash, first);

  m.add_output(dir / "model.ckpt", true);
  m.add_output(dir / "log.csv");
  const auto path = write_manifest(m, dir.path());
  EXPECT_EQ(path.filename(), "manifest_test.json");
  const auto j = m.to_json();
  EXPECT_EQ(j["checkpoints"].size(), 1u);
  EXPECT_EQ(j["outputs"].size(), 2u);
}

}  // namespace
}  // namespace ctcd::config
