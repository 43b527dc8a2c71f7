#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bevkit/annotator.hpp"
#include "bevkit/errors.hpp"
#include "bevkit/motion.hpp"
#include "bevkit/synth.hpp"
#include "test_util.hpp"

using namespace bevkit;

namespace {

void expect_state_near(const VehicleState& a, const VehicleState& b, double tol) {
  EXPECT_NEAR(a.position.x, b.position.x, tol);
  EXPECT_NEAR(a.position.y, b.position.y, tol);
  EXPECT_NEAR(a.speed, b.speed, tol);
  EXPECT_NEAR(shortest_arc(a.yaw, b.yaw), 0.0, tol);
}

std::vector<VehicleAction> random_actions(std::mt19937_64& g, int n) {
  std::uniform_real_distribution<double> acc(-6, 6), om(-1.5, 1.5);
  std::vector<VehicleAction> out;
  for (int i = 0; i < n; ++i) out.push_back({acc(g), om(g)});
  return out;
}

}  // namespace

TEST(Unicycle, FixedPointAtRest) {
  const VehicleState s{{3, -2}, 0.0, 1.0};
  EXPECT_EQ(step_unicycle(s, {0, 0}, 0.1), s);
}

TEST(Unicycle, HandEulerSteps) {
  auto n = step_unicycle({{0, 0}, 1, 0}, {1, 0}, 0.1);
  EXPECT_DOUBLE_EQ(n.position.x, 0.1);
  EXPECT_DOUBLE_EQ(n.position.y, 0.0);
  EXPECT_DOUBLE_EQ(n.speed, 1.1);
  EXPECT_DOUBLE_EQ(n.yaw, 0.0);

  n = step_unicycle({{0, 0}, 2, 0}, {0, kPi / 2}, 0.1);
  EXPECT_DOUBLE_EQ(n.position.x, 0.2);
  EXPECT_DOUBLE_EQ(n.position.y, 0.0);
  EXPECT_DOUBLE_EQ(n.speed, 2.0);
  EXPECT_NEAR(n.yaw, 0.15708, 5e-6);
}

TEST(Unicycle, SpeedClampedAtZero) {
  std::mt19937_64 g(3);
  const auto states = rollout({{0, 0}, 1.0, 0}, random_actions(g, 200), 0.1);
  for (const auto& s : states) EXPECT_GE(s.speed, 0.0);
}

TEST(Unicycle, RigidMotionEquivariance) {
  const VehicleState s{{1, 2}, 3.0, 0.4};
  const VehicleAction a{0.7, -0.3};
  const double rot = 1.1;
  const Vec2 shift{5, -7};
  const auto moved = [&](const VehicleState& x) {
    return VehicleState{rotate(x.position, rot) + shift, x.speed, normalize_angle(x.yaw + rot)};
  };
  expect_state_near(step_unicycle(moved(s), a, 0.1), moved(step_unicycle(s, a, 0.1)), 1e-12);
}

TEST(Rollout, EmptyAndStraight) {
  const VehicleState s0{{0, 0}, 3.0, 0};
  EXPECT_EQ(rollout(s0, {}, 0.1), std::vector<VehicleState>{s0});
  const auto r = rollout(s0, std::vector<VehicleAction>(50), 0.1);
  ASSERT_EQ(r.size(), 51u);
  EXPECT_NEAR(r.back().position.x, 3.0 * 50 * 0.1, 1e-9);
  EXPECT_NEAR(r.back().position.y, 0.0, 1e-12);
}

TEST(InverseDynamics, ConstantTrajectoryGivesZeroActions) {
  const auto tr = testutil::constant_track("v", {1, 1}, 0.5, 10, 0.0);
  for (const auto& a : inverse_dynamics(tr.states, 0.1)) {
    EXPECT_EQ(a.accel, 0.0);
    EXPECT_EQ(a.yaw_rate, 0.0);
  }
  EXPECT_THROW(inverse_dynamics(std::vector<VehicleState>(1), 0.1), DegenerateInput);
}

TEST(InverseDynamics, RoundTripOnEulerTrajectories) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> pos(-50, 50), yaw(-kPi, kPi), spd(0, 15);
  for (int trial = 0; trial < 200; ++trial) {
    const VehicleState s0{{pos(g), pos(g)}, spd(g), yaw(g)};
    const auto traj = rollout(s0, random_actions(g, 60), 0.1);
    const auto back = rollout(traj.front(), inverse_dynamics(traj, 0.1), 0.1);
    ASSERT_EQ(back.size(), traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) expect_state_near(back[i], traj[i], 1e-9);
  }
}

TEST(InverseDynamics, YawWrapHasNoSpike) {
  const std::vector<VehicleState> t{{{0, 0}, 1, kPi - 0.01}, {{0, 0}, 1, -kPi + 0.01}};
  EXPECT_NEAR(inverse_dynamics(t, 0.1)[0].yaw_rate, 0.2, 1e-9);
}

TEST(MapUnderstanding, StraightRoadSingleLane) {
  auto scene = testutil::empty_road(200);
  scene.tracks.push_back(testutil::arc_track("v", {20, 0}, 0, 5, 0, 60));
  const auto mu = extract_map_understanding_gt(scene, "v", 0);
  EXPECT_EQ(mu.global.area[static_cast<std::size_t>(AreaType::RegularRoad)], 1.0f);
  EXPECT_EQ(mu.global.lane[static_cast<std::size_t>(LaneType::Straight)], 1.0f);
  ASSERT_EQ(mu.navigation.lane_ids, std::vector<LaneId>{"L0"});
  const auto& c = mu.navigation.centerlines[0];
  ASSERT_EQ(c.size(), 20u);
  // lane runs 0..200 along x; vehicle at x=20 facing +x
  EXPECT_NEAR(c.front().x, -20.0, 1e-9);
  EXPECT_NEAR(c.back().x, 180.0, 1e-9);
  for (const auto& p : c) EXPECT_NEAR(p.y, 0.0, 1e-9);
}

TEST(MapUnderstanding, OffRoadVehicle) {
  auto scene = testutil::empty_road(200);
  scene.tracks.push_back(testutil::constant_track("v", {50, 40}, 0, 20));
  const auto mu = extract_map_understanding_gt(scene, "v", 0);
  EXPECT_EQ(mu.global.lane[static_cast<std::size_t>(LaneType::Other)], 1.0f);
  EXPECT_TRUE(mu.navigation.empty());
  float sum = 0;
  for (float v : mu.global.area) sum += v;
  EXPECT_EQ(sum, 1.0f);
  EXPECT_THROW(extract_map_understanding_gt(scene, "nope", 0), UnknownVehicle);
  EXPECT_THROW(extract_map_understanding_gt(scene, "v", 99), UnknownVehicle);
}

TEST(MapUnderstanding, FourWayLanesFollowGroundTruth) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto sr = synth_scene({Layout::FourWay, 4}, seed);
    for (const auto& vg : sr.truth.vehicles) {
      const auto& st = vg.steps.front();
      if (st.trajectory != TrajectoryCategory::LeftTurn) continue;
      std::vector<LaneId> expect;
      for (const auto& id : st.trajectory_lanes)
        if (std::find(expect.begin(), expect.end(), id) == expect.end() && expect.size() < 4) expect.push_back(id);
      const auto mu = extract_map_understanding_gt(sr.scene, vg.vehicle_id, st.t);
      EXPECT_EQ(mu.navigation.lane_ids, expect) << sr.scene.scene_id << " " << vg.vehicle_id;
      for (const auto& c : mu.navigation.centerlines) EXPECT_EQ(c.size(), 20u);
      ++checked;
    }
  }
  EXPECT_GT(checked, 5);
}

TEST(Describe, Examples) {
  const auto straight = testutil::arc_track("v", {0, 0}, 0, 5, 0, 50);
  EXPECT_EQ(describe_trajectory(straight.states, 0.1), "go straight, at moderate speed, maintaining speed");

  std::vector<VehicleState> ramp;
  for (int k = 0; k <= 50; ++k) ramp.push_back({{0.1 * k, 0}, 10.0 * k / 50, 0});
  // mean 5 m/s, constant 2 m/s^2
  const auto r = describe_trajectory(ramp, 0.1);
  EXPECT_EQ(r.substr(r.rfind(", ") + 2), "accelerating");
  EXPECT_NE(r.find("at moderate speed"), std::string::npos);

  const auto still = testutil::constant_track("v", {0, 0}, 0, 51);
  EXPECT_EQ(describe_trajectory(still.states, 0.1), "remain stationary, at slow speed, maintaining speed");
  EXPECT_THROW(describe_trajectory(std::vector<VehicleState>(1), 0.1), DegenerateInput);
}

TEST(Describe, SegmentsAndTypeAgreement) {
  std::vector<VehicleAction> acts(60);
  for (int i = 0; i < 20; ++i) acts[static_cast<std::size_t>(i)].accel = 2.0;
  const auto traj = rollout({{0, 0}, 4, 0}, acts, 0.1);
  const auto d = describe_trajectory(traj, 0.1);
  EXPECT_EQ(d, "go straight, at moderate speed, accelerate then maintain speed");

  std::mt19937_64 g(5);
  for (int i = 0; i < 50; ++i) {
    const auto t = rollout({{0, 0}, 6, 0}, random_actions(g, 50), 0.1);
    const auto text = describe_trajectory(t, 0.1);
    EXPECT_EQ(text.substr(0, text.find(',')), trajectory_phrase(classify_states(t)));
    // at most 3 segments
    std::size_t thens = 0;
    for (auto p = text.find(" then "); p != std::string::npos; p = text.find(" then ", p + 1)) ++thens;
    EXPECT_LE(thens, 2u);
  }
}

TEST(Condition, ShapesPaddingAndRoundTrip) {
  auto scene = testutil::empty_road(200);
  auto tr = testutil::arc_track("v", {20, 0}, 0, 5, 0, 60);
  scene.tracks.push_back(tr);
  const auto b = assemble_condition(scene, 3, {{"v", "go straight, at moderate speed, maintaining speed"}});
  EXPECT_EQ(b.vehicle_ids.size(), 1u);
  EXPECT_EQ(b.history_states.size(), 1u * 10 * 4);
  EXPECT_EQ(b.global.size(), 1u * 9);
  EXPECT_EQ(b.navigation.size(), 1u * 4 * 20 * 2);
  EXPECT_EQ(b.nav_valid, (std::vector<std::uint8_t>{1, 0, 0, 0}));
  // t0=3 leaves 4 real states; rows 0..6 repeat the earliest one
  for (int row = 1; row <= 6; ++row)
    for (int c = 0; c < 4; ++c) EXPECT_EQ(b.history_states[static_cast<std::size_t>(row * 4 + c)], b.history_states[static_cast<std::size_t>(c)]);
  EXPECT_NE(b.history_states[7 * 4], b.history_states[0]);
  EXPECT_EQ(b.history_states[9 * 4], static_cast<float>(tr.at(3).position.x));
  for (std::size_t i = 40; i < b.navigation.size(); ++i) EXPECT_EQ(b.navigation[i], 0.0f);

  const auto dir = testutil::temp_dir("cond");
  export_condition(b, dir);
  const auto back = load_condition(dir);
  EXPECT_EQ(back, b);
  EXPECT_EQ(std::filesystem::file_size(dir / "history.f32"), 160u);
  std::filesystem::remove_all(dir);
}

TEST(Condition, NoVehicleAtT0) {
  auto scene = testutil::empty_road(200);
  scene.tracks.push_back(testutil::constant_track("v", {20, 0}, 0, 5));
  EXPECT_THROW(assemble_condition(scene, 50, {}), UnknownVehicle);
}

TEST(Planner, OnCenterlineAtTargetSpeed) {
  NavigationReasoning nav;
  nav.centerlines.push_back(resample_polyline(std::vector<Vec2>{{-10, 0}, {200, 0}}, 20));
  const auto acts = lane_follow_plan({{0, 0}, 5, 0}, nav, 5.0, 50, 0.1);
  ASSERT_EQ(acts.size(), 50u);
  for (const auto& a : acts) {
    EXPECT_NEAR(a.accel, 0.0, 1e-9);
    EXPECT_NEAR(a.yaw_rate, 0.0, 1e-9);
  }
}

TEST(Planner, EmptyNavigationHoldsCourse) {
  const auto acts = lane_follow_plan({{0, 0}, 5, 0.3}, {}, 8.0, 30, 0.1);
  ASSERT_EQ(acts.size(), 30u);
  for (const auto& a : acts) {
    EXPECT_EQ(a.accel, 0.0);
    EXPECT_EQ(a.yaw_rate, 0.0);
  }
}

TEST(Planner, NinetyDegreeTurn) {
  // straight, quarter circle of radius 12 (curvature < 0.1), straight
  std::vector<Vec2> path{{-30, 0}};
  for (int k = 0; k <= 30; ++k) {
    const double a = -kPi / 2 + (kPi / 2) * k / 30.0;
    path.push_back({12 * std::cos(a), 12 + 12 * std::sin(a)});
  }
  path.push_back({12, 60});
  NavigationReasoning nav;
  nav.centerlines = {resample_polyline(path, 80)};
  const VehicleState s0{{-20, 0}, 6, 0};
  const auto states = rollout(s0, lane_follow_plan(s0, nav, 6.0, 120, 0.1), 0.1);
  const auto& end = states.back();
  EXPECT_GT(end.position.y, 20.0);
  EXPECT_LT(std::abs(shortest_arc(end.yaw, kPi / 2)), deg2rad(10));
  for (const auto& s : states) EXPECT_LT(project_onto_polyline(path, s.position).distance, 1.0);
}

TEST(Planner, SamplesStartAtStateAndAreDeterministic) {
  const auto sr = synth_scene({Layout::FourWay, 4}, 9);
  const auto& id = sr.scene.tracks.front().vehicle_id;
  const auto a = plan_samples(sr.scene, id, 0, 50, 3, NavMode::GroundTruth, 42);
  const auto b = plan_samples(sr.scene, id, 0, 50, 3, NavMode::GroundTruth, 42);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 3u);
  for (const auto& s : a) {
    ASSERT_EQ(s.size(), 51u);
    EXPECT_EQ(s.front(), sr.scene.tracks.front().at(0));
  }
  EXPECT_THROW(plan_samples(sr.scene, id, 0, 50, 0, NavMode::None, 1), ConfigError);
}
