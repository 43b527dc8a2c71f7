#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bevkit/annotator.hpp"
#include "bevkit/errors.hpp"
#include "bevkit/synth.hpp"
#include "test_util.hpp"

using namespace bevkit;

namespace {
Scene road_with(std::vector<VehicleTrack> tracks, const std::string& ego = "ego") {
  Scene s = testutil::empty_road(400.0);
  s.tracks = std::move(tracks);
  s.ego_id = ego;
  return s;
}
}  // namespace

TEST(ClassifyArea, JunctionCenterAndFarPoint) {
  SynthSpec spec;
  spec.layout = Layout::FourWay;
  const auto r = synth_scene(spec, 3);
  EXPECT_EQ(classify_area(r.scene.map, {0, 0}), AreaType::Intersection);
  EXPECT_EQ(classify_area(r.scene.map, {500, 500}), AreaType::RegularRoad);
}

TEST(ClassifyArea, PriorityWhenPolygonsOverlap) {
  MapGraph m;
  m.areas.push_back(testutil::rect_area("park", 0, 0, 10, 10, AreaType::ParkingArea));
  m.areas.push_back(testutil::rect_area("x", 5, 5, 15, 15, AreaType::Intersection));
  m.areas.push_back(testutil::rect_area("round", 8, 0, 20, 20, AreaType::Roundabout));
  EXPECT_EQ(classify_area(m, {2, 2}), AreaType::ParkingArea);
  EXPECT_EQ(classify_area(m, {9, 9}), AreaType::Intersection);
  EXPECT_EQ(classify_area(m, {9, 2}), AreaType::Roundabout);
  EXPECT_EQ(classify_area(m, {30, 30}), AreaType::RegularRoad);
}

TEST(ClassifyArea, RandomPointsMatchBruteForce) {
  SynthSpec spec;
  spec.layout = Layout::Roundabout;
  const auto r = synth_scene(spec, 5);
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-90, 90);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{u(gen), u(gen)};
    // brute force: crossing-number test over every area, best priority wins
    AreaType expect = AreaType::RegularRoad;
    for (const auto& a : r.scene.map.areas) {
      bool in = false;
      const auto& poly = a.polygon;
      for (std::size_t k = 0, j = poly.size() - 1; k < poly.size(); j = k++) {
        if ((poly[k].y > p.y) != (poly[j].y > p.y) &&
            p.x < (poly[j].x - poly[k].x) * (p.y - poly[k].y) / (poly[j].y - poly[k].y) + poly[k].x)
          in = !in;
      }
      if (in && static_cast<int>(a.area_type) < static_cast<int>(expect)) expect = a.area_type;
    }
    EXPECT_EQ(classify_area(r.scene.map, p), expect);
  }
}

TEST(CurrentLane, LoneLaneAndOffRoad) {
  const Scene s = testutil::empty_road(50.0);
  EXPECT_EQ(current_lane(s.map, {{25, 0}, 3.0, 0.0}), std::optional<LaneId>("L0"));
  EXPECT_EQ(current_lane(s.map, {{25, 30}, 3.0, 0.0}), std::nullopt);
}

TEST(CurrentLane, CrossingOverlapPicksAlignedLane) {
  MapGraph m;
  m.lanes.push_back(testutil::straight_lane("A", -20, 20));
  Lane b;
  b.id = "B";
  b.centerline = {{0, -20}, {0, 20}};
  b.boundary = {{-1.75, -20}, {1.75, -20}, {1.75, 20}, {-1.75, 20}};
  m.lanes.push_back(b);
  // the point (0.5, 0.5) lies in both; yaw matches A's tangent (0 rad), 90 deg off B's
  EXPECT_EQ(current_lane(m, {{0.5, 0.5}, 4.0, 0.0}), std::optional<LaneId>("A"));
  EXPECT_EQ(current_lane(m, {{0.5, 0.5}, 4.0, kPi / 2}), std::optional<LaneId>("B"));
  // 30 deg yaw: 30 off A, 60 off B
  EXPECT_EQ(current_lane(m, {{0.5, 0.5}, 4.0, deg2rad(30)}), std::optional<LaneId>("A"));
}

TEST(CurrentLane, EqualHeadingFallsBackToLateralDistance) {
  MapGraph m;
  m.lanes.push_back(testutil::straight_lane("far", 0, 40, 0.0));
  m.lanes.push_back(testutil::straight_lane("near", 0, 40, 1.0));
  EXPECT_EQ(current_lane(m, {{10, 0.8}, 1.0, 0.0}), std::optional<LaneId>("near"));
  EXPECT_EQ(current_lane(m, {{10, 0.2}, 1.0, 0.0}), std::optional<LaneId>("far"));
}

TEST(CurrentLane, NeverMissesAContainingLane) {
  SynthSpec spec;
  spec.layout = Layout::FourWay;
  const auto r = synth_scene(spec, 8);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-70, 70), yaw(-kPi, kPi);
  for (int i = 0; i < 2000; ++i) {
    const VehicleState st{{u(gen), u(gen)}, 1.0, yaw(gen)};
    const bool any = std::any_of(r.scene.map.lanes.begin(), r.scene.map.lanes.end(),
                                 [&](const Lane& l) { return polygon_contains(l.boundary, st.position); });
    const auto got = current_lane(r.scene.map, st);
    EXPECT_EQ(got.has_value(), any);
    if (got) EXPECT_TRUE(polygon_contains(r.scene.map.find_lane(*got)->boundary, st.position));
  }
}

TEST(ClassifyTrajectory, ConstantStateIsStationary) {
  const auto t = testutil::constant_track("a", {1, 2}, 0.3, 51);
  EXPECT_EQ(classify_trajectory(t, 0), TrajectoryCategory::Stationary);
}

TEST(ClassifyTrajectory, ClosedFormYawChange) {
  // dtheta = omega * 50 * 0.1
  EXPECT_EQ(classify_trajectory(testutil::arc_track("a", {0, 0}, 0.0, 5.0, 0.2, 50), 0),
            TrajectoryCategory::LeftTurn);
  EXPECT_EQ(classify_trajectory(testutil::arc_track("a", {0, 0}, 0.0, 5.0, 0.6, 50), 0), TrajectoryCategory::UTurn);
  EXPECT_EQ(classify_trajectory(testutil::arc_track("a", {0, 0}, 0.0, 5.0, -0.2, 50), 0),
            TrajectoryCategory::RightTurn);
  EXPECT_EQ(classify_trajectory(testutil::arc_track("a", {0, 0}, 0.0, 5.0, 0.0, 50), 0),
            TrajectoryCategory::Straight);
}

TEST(ClassifyTrajectory, WrapAcrossPiIsUnwrapped) {
  // heading starts near +pi and turns left through the wrap: 57 deg net
  const auto t = testutil::arc_track("a", {0, 0}, kPi - 0.3, 5.0, 0.2, 50);
  EXPECT_EQ(classify_trajectory(t, 0), TrajectoryCategory::LeftTurn);
}

TEST(ClassifyTrajectory, ShortFutureThrowsAndTruncates) {
  const auto t = testutil::arc_track("a", {0, 0}, 0.0, 5.0, 0.0, 15);
  EXPECT_EQ(classify_trajectory(t, 5), TrajectoryCategory::Straight);  // 10 steps left
  EXPECT_THROW(classify_trajectory(t, 6), InsufficientHorizon);
}

TEST(ClassifyTrajectory, RotationInvariant) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> om(-0.7, 0.7), rot(-kPi, kPi), v(0.0, 8.0);
  for (int i = 0; i < 300; ++i) {
    const double w = om(gen), sp = v(gen), r = rot(gen);
    const auto a = testutil::arc_track("a", {0, 0}, 0.0, sp, w, 50);
    auto b = a;
    for (auto& s : b.states) {
      s.position = rotate(s.position, r);
      s.yaw = normalize_angle(s.yaw + r);
    }
    EXPECT_EQ(classify_trajectory(a, 0), classify_trajectory(b, 0));
  }
}

TEST(TrajectoryLanes, SuccessorSequenceAndStationary) {
  Scene s = testutil::empty_road(40.0);
  s.map.lanes[0].id = "A";
  s.map.lanes[0].successors = {"B"};
  s.map.lanes.push_back(testutil::straight_lane("B", 40, 80));
  s.map.areas[0] = testutil::rect_area("road", -10, -10, 90, 10);
  const auto moving = testutil::arc_track("v", {30, 0}, 0.0, 5.0, 0.0, 50);
  EXPECT_EQ(trajectory_lanes(s.map, moving, 0), (std::vector<LaneId>{"A", "B"}));
  const auto parked = testutil::constant_track("p", {10, 0}, 0.0, 51);
  EXPECT_EQ(trajectory_lanes(s.map, parked, 0), (std::vector<LaneId>{"A"}));
}

TEST(TrajectoryLanes, LeftTurnMatchesGroundTruthRoute) {
  SynthSpec spec;
  spec.layout = Layout::FourWay;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40 && checked < 5; ++seed) {
    const auto r = synth_scene(spec, seed);
    for (const auto& vg : r.truth.vehicles) {
      for (const auto& st : vg.steps) {
        if (!st.trajectory || *st.trajectory != TrajectoryCategory::LeftTurn) continue;
        EXPECT_EQ(trajectory_lanes(r.scene.map, r.scene.track(vg.vehicle_id), st.t), st.trajectory_lanes);
        ++checked;
        break;
      }
    }
  }
  EXPECT_GE(checked, 5);
}

TEST(RelativeCars, StraightAheadAndBoundary) {
  const auto ego = testutil::constant_track("ego", {50, 0}, 0.0, 1);
  {
    const Scene s = road_with({ego, testutil::constant_track("a", {60, 0}, 0.0, 1)});
    const auto rc = relative_cars(s, "ego", 0);
    EXPECT_EQ(rc[0], (std::vector<std::string>{"a"}));
    EXPECT_TRUE(rc[1].empty() && rc[2].empty() && rc[3].empty());
  }
  {
    const Scene s = road_with({ego, testutil::constant_track("a", {60, 10}, 0.0, 1)});
    EXPECT_EQ(relative_cars(s, "ego", 0)[static_cast<int>(Direction::Front)], (std::vector<std::string>{"a"}));
  }
  EXPECT_EQ(bearing_sector(deg2rad(45)), Direction::Front);
  EXPECT_EQ(bearing_sector(deg2rad(-45)), Direction::Front);
  EXPECT_EQ(bearing_sector(deg2rad(135)), Direction::Behind);
  EXPECT_EQ(bearing_sector(deg2rad(-135)), Direction::Behind);
  EXPECT_EQ(bearing_sector(deg2rad(90)), Direction::Left);
  EXPECT_EQ(bearing_sector(deg2rad(-90)), Direction::Right);
}

TEST(RelativeCars, RingOfEightTwoPerDirection) {
  // bearings 22.5 + 45k relative to an ego heading of 0.7 rad
  const double yaw = 0.7;
  std::vector<VehicleTrack> tracks{testutil::constant_track("ego", {100, 0}, yaw, 1)};
  std::map<std::string, Direction> expect;
  for (int k = 0; k < 8; ++k) {
    const double beta_deg = 22.5 + 45.0 * k;
    const double world = yaw + deg2rad(beta_deg);
    const std::string id = "c" + std::to_string(k);
    tracks.push_back(testutil::constant_track(id, {100 + 20 * std::cos(world), 20 * std::sin(world)}, 0.0, 1));
    const double b = beta_deg > 180 ? beta_deg - 360 : beta_deg;  // hand bearing in (-180, 180]
    expect[id] = std::abs(b) <= 45    ? Direction::Front
                 : std::abs(b) >= 135 ? Direction::Behind
                 : b > 0              ? Direction::Left
                                      : Direction::Right;
  }
  const auto rc = relative_cars(road_with(tracks), "ego", 0);
  for (Direction d : kAllDirections) EXPECT_EQ(rc[static_cast<int>(d)].size(), 2u);
  for (const auto& [id, d] : expect) {
    const auto& lst = rc[static_cast<int>(d)];
    EXPECT_NE(std::find(lst.begin(), lst.end(), id), lst.end()) << id;
  }
}

TEST(RelativeCars, RangeAndSortingAndUnknown) {
  const Scene s = road_with({testutil::constant_track("ego", {0, 0}, 0.0, 1),
                             testutil::constant_track("far", {40, 0}, 0.0, 1),
                             testutil::constant_track("near", {10, 1}, 0.0, 1),
                             testutil::constant_track("out", {60, 0}, 0.0, 1)});
  const auto rc = relative_cars(s, "ego", 0);
  EXPECT_EQ(rc[0], (std::vector<std::string>{"near", "far"}));
  EXPECT_THROW(relative_cars(s, "ghost", 0), UnknownVehicle);
  EXPECT_THROW(pairwise_distances(s, "ghost", 0), UnknownVehicle);
}

TEST(RelativeCars, DirectionListsPartitionInRangeVehicles) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-60, 60), yaw(-kPi, kPi);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VehicleTrack> tracks{testutil::constant_track("ego", {0, 0}, yaw(gen), 1)};
    for (int k = 0; k < 12; ++k)
      tracks.push_back(testutil::constant_track("v" + std::to_string(k), {u(gen), u(gen)}, 0.0, 1));
    const Scene s = road_with(tracks);
    const auto rc = relative_cars(s, "ego", 0);
    std::multiset<std::string> seen;
    for (const auto& l : rc) seen.insert(l.begin(), l.end());
    for (const auto& t : tracks) {
      if (t.vehicle_id == "ego") continue;
      const bool in_range = t.states[0].position.norm() <= 50.0;
      EXPECT_EQ(seen.count(t.vehicle_id), in_range ? 1u : 0u);
    }
  }
}

TEST(PairwiseDistances, TriangleAndEmpty) {
  const Scene s = road_with({testutil::constant_track("ego", {10, 0}, 0.0, 1),
                             testutil::constant_track("o", {13, 4}, 0.0, 1)});
  EXPECT_DOUBLE_EQ(pairwise_distances(s, "ego", 0).at("o"), 5.0);
  const Scene alone = road_with({testutil::constant_track("ego", {10, 0}, 0.0, 1)});
  EXPECT_TRUE(pairwise_distances(alone, "ego", 0).empty());
}

TEST(PairwiseDistances, MatchesNaiveLoopAndIsSymmetric) {
  SynthSpec spec;
  spec.layout = Layout::StraightRoad;
  spec.n_vehicles = 10;
  const auto r = synth_scene(spec, 12);
  for (int t : {0, 30, 60}) {
    for (const auto& a : r.scene.tracks) {
      const auto d = pairwise_distances(r.scene, a.vehicle_id, t);
      std::map<std::string, double> naive;
      for (const auto& b : r.scene.tracks) {
        if (b.vehicle_id == a.vehicle_id) continue;
        const double dx = a.at(t).position.x - b.at(t).position.x, dy = a.at(t).position.y - b.at(t).position.y;
        naive[b.vehicle_id] = std::sqrt(dx * dx + dy * dy);
      }
      ASSERT_EQ(d.size(), naive.size());
      for (const auto& [id, v] : naive) {
        EXPECT_NEAR(d.at(id), v, 1e-12);
        EXPECT_EQ(d.at(id), pairwise_distances(r.scene, id, t).at(a.vehicle_id));
      }
    }
  }
}

TEST(AnnotateScene, StraightRoadSingleVehicle) {
  SynthSpec spec;
  spec.layout = Layout::StraightRoad;
  spec.n_vehicles = 1;
  spec.horizon = 60;
  const auto r = synth_scene(spec, 7);
  std::size_t skipped = 0;
  const auto recs = annotate_scene(r.scene, {}, &skipped);
  EXPECT_EQ(recs.size(), 51u);
  EXPECT_EQ(skipped, 10u);
  for (const auto& rec : recs) {
    EXPECT_EQ(rec.trajectory, TrajectoryCategory::Straight);
    EXPECT_EQ(rec.area_type, AreaType::RegularRoad);
  }
}

TEST(AnnotateScene, ShortTracksGiveNoRecords) {
  const Scene s = road_with({testutil::constant_track("ego", {10, 0}, 0.0, 6)});
  EXPECT_TRUE(annotate_scene(s).empty());
}

TEST(AnnotateScene, IndependentOfTrackOrder) {
  SynthSpec spec;
  spec.layout = Layout::TJunction;
  spec.n_vehicles = 6;
  const auto r = synth_scene(spec, 31);
  Scene shuffled = r.scene;
  std::reverse(shuffled.tracks.begin(), shuffled.tracks.end());
  EXPECT_EQ(annotate_scene(r.scene), annotate_scene(shuffled));
}

TEST(AnnotateScene, RecordInvariants) {
  SynthSpec spec;
  spec.layout = Layout::ParkingLot;
  spec.n_vehicles = 8;
  const auto r = synth_scene(spec, 2);
  for (const auto& rec : annotate_scene(r.scene)) {
    EXPECT_EQ(rec.distances.size(), r.scene.tracks.size() - 1);
    for (const auto& [id, d] : rec.distances) EXPECT_GE(d, 0.0);
    std::set<std::string> seen;
    for (const auto& l : rec.relative_cars)
      for (const auto& id : l) EXPECT_TRUE(seen.insert(id).second);
    if (!rec.current_lane) EXPECT_EQ(rec.lane_type, LaneType::Other);
  }
}

TEST(AnnotateScene, RecordJsonRoundTripAndFieldNames) {
  SynthSpec spec;
  spec.layout = Layout::FourWay;
  const auto recs = annotate_scene(synth_scene(spec, 1).scene);
  ASSERT_FALSE(recs.empty());
  for (const auto& rec : recs) {
    const Json j = record_to_json(rec);
    for (const char* key : {"area_type", "lane_type", "current_lane", "trajectory", "trajectory_lane",
                            "relative_cars", "distance"})
      EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(record_from_json(j), rec);
  }
}

TEST(AnnotateScene, MatchesGroundTruthOnEveryLayout) {
  std::size_t total = 0, traj_ok = 0, traj_total = 0;
  for (Layout l : kAllLayouts) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      SynthSpec spec;
      spec.layout = l;
      spec.n_vehicles = std::min(8, layout_capacity(l));
      const auto r = synth_scene(spec, seed);
      for (const auto& rec : annotate_scene(r.scene)) {
        const auto* vg = r.truth.find(rec.vehicle_id);
        ASSERT_NE(vg, nullptr);
        const auto& st = vg->steps.at(static_cast<std::size_t>(rec.timestep));
        ASSERT_EQ(st.t, rec.timestep);
        ++total;
        EXPECT_EQ(rec.area_type, st.area_type) << to_string(l) << seed << rec.vehicle_id << "@" << rec.timestep;
        EXPECT_EQ(rec.current_lane, st.lane) << to_string(l) << seed << rec.vehicle_id << "@" << rec.timestep;
        EXPECT_EQ(rec.lane_type, st.lane_type);
        for (Direction d : kAllDirections) {
          const auto k = static_cast<std::size_t>(d);
          EXPECT_EQ(rec.relative_cars[k].empty(), st.neighbors[k].empty());
        }
        if (st.trajectory) {
          ++traj_total;
          traj_ok += rec.trajectory == *st.trajectory;
        }
      }
    }
  }
  EXPECT_GT(total, 1000u);
  EXPECT_GE(static_cast<double>(traj_ok), 0.95 * static_cast<double>(traj_total));
}
