#include <gtest/gtest.h>

#include "bevkit/cli.hpp"
#include "bevkit/json_io.hpp"
#include "bevkit/scene_io.hpp"
#include "test_util.hpp"

using namespace bevkit;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "bevkit");
  return cli::run(args);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { dir = testutil::temp_dir("cli"); }
  void TearDown() override { fs::remove_all(dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(CliTest, SynthWritesValidScene) {
  ASSERT_EQ(run({"synth", "--layout", "four_way", "--n", "4", "--seed", "7", "-o", p("s.json")}), 0);
  const auto s = load_scene(p("s.json"));
  EXPECT_EQ(s.tracks.size(), 4u);
  EXPECT_NO_THROW(validate(s));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}), cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitUsage);
  EXPECT_EQ(run({"synth", "--layout", "four_way", "-o", p("s.json")}), cli::kExitUsage);  // no seed
  EXPECT_EQ(run({"synth", "--layout", "moon", "--seed", "1", "-o", p("s.json")}), cli::kExitUsage);
  EXPECT_EQ(run({"annotate", "--scenes", p("missing"), "-o", p("a.jsonl")}), cli::kExitIo);
  // more vehicles than the layout holds
  EXPECT_EQ(run({"synth", "--layout", "t_junction", "--n", "500", "--seed", "1", "-o", p("s.json")}),
            cli::kExitValidation);
  write_text_file(p("bad.json"), "{\"scene_id\": 3}");
  EXPECT_EQ(run({"annotate", "--scenes", p("bad.json"), "-o", p("a.jsonl")}), cli::kExitValidation);
}

TEST_F(CliTest, ReplayedRolloutScoresZero) {
  ASSERT_EQ(run({"synth", "--count", "3", "--seed", "5", "--out-dir", p("scenes")}), 0);
  ASSERT_EQ(run({"rollout", "--scenes", p("scenes"), "-o", p("r.jsonl"), "--k", "2", "--replay", "--seed", "1"}), 0);
  ASSERT_EQ(run({"eval-traj", "--scenes", p("scenes"), "--rollouts", p("r.jsonl"), "-o", p("m.json")}), 0);
  const auto m = parse_json(read_text_file(p("m.json")), "m.json");
  for (const char* k : {"mADE", "minADE", "mFDE", "minFDE"}) EXPECT_EQ(m.at(k).get<double>(), 0.0) << k;
  EXPECT_GT(m.at("trajectories").get<int>(), 0);
}

TEST_F(CliTest, QaPipelineAndPredictionScoring) {
  ASSERT_EQ(run({"synth", "--count", "5", "--seed", "2", "--out-dir", p("scenes")}), 0);
  ASSERT_EQ(run({"annotate", "--scenes", p("scenes"), "-o", p("ann.jsonl")}), 0);
  ASSERT_EQ(run({"render", "--scenes", p("scenes"), "--out-dir", p("img"), "--seed", "2", "--per-scene", "2"}), 0);
  ASSERT_EQ(run({"genqa", "--scenes", p("scenes"), "--annotations", p("ann.jsonl"), "--images",
                 p("img/index.jsonl"), "-o", p("qa.jsonl"), "--seed", "2"}),
            0);
  std::vector<Json> preds;
  for (const auto& row : read_jsonl(p("qa.jsonl"))) preds.push_back({{"qa_id", row["qa_id"]}, {"answer", row["answer"]}});
  ASSERT_FALSE(preds.empty());
  write_jsonl(p("preds.jsonl"), preds);
  ASSERT_EQ(run({"eval-qa", "--dataset", p("qa.jsonl"), "--predictions", p("preds.jsonl"), "-o", p("acc.json")}), 0);
  EXPECT_EQ(parse_json(read_text_file(p("acc.json")), "acc.json").at("accuracy").get<double>(), 1.0);
  preds.pop_back();
  write_jsonl(p("preds.jsonl"), preds);
  EXPECT_EQ(run({"eval-qa", "--dataset", p("qa.jsonl"), "--predictions", p("preds.jsonl")}), cli::kExitValidation);
  EXPECT_EQ(fs::exists(p("img/index.jsonl")), true);
}

TEST_F(CliTest, ConfigFileFromEnvironment) {
  write_text_file(p("defaults.toml"), "[synth]\nseed = 7\nlayout = \"roundabout\"\nn = 3\n");
  ::setenv("BEVKIT_CONFIG", p("defaults.toml").c_str(), 1);
  const int rc = run({"synth", "-o", p("s.json")});
  ::unsetenv("BEVKIT_CONFIG");
  ASSERT_EQ(rc, 0);
  EXPECT_EQ(load_scene(p("s.json")).tracks.size(), 3u);
}
