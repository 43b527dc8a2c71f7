#include "bevkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "bevkit/errors.hpp"
#include "bevkit/rng.hpp"

namespace bevkit {

namespace {

constexpr double kLaneWidth = 3.5;
constexpr double kPointSpacing = 1.0;
// Sampled arclengths closer than this to a lane joint are nudged off it, so
// the 6-decimal rounding of positions cannot move a vehicle across a joint.
constexpr double kJointMargin = 1e-4;

Vec2 q6(Vec2 p) { return {quantize6(p.x), quantize6(p.y)}; }

std::vector<Vec2> line_points(Vec2 a, Vec2 b) {
  const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / kPointSpacing)));
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
  pts.back() = b;
  return pts;
}

/// Arc around `center` from p0 sweeping `sweep` radians (CCW positive); endpoints pinned.
std::vector<Vec2> arc_points(Vec2 center, Vec2 p0, double sweep, Vec2 p1) {
  const Vec2 r0 = p0 - center;
  const double radius = r0.norm();
  const double a0 = std::atan2(r0.y, r0.x);
  const int n = std::max(2, static_cast<int>(std::ceil(std::abs(sweep) * radius / kPointSpacing)));
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + sweep * static_cast<double>(i) / n;
    pts.push_back(center + Vec2{radius * std::cos(a), radius * std::sin(a)});
  }
  pts.front() = p0;
  pts.back() = p1;
  return pts;
}

std::vector<Vec2> rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

/// Rectangle spanning [d0, d1] along unit `u` and [-half, half] along its left normal.
std::vector<Vec2> arm_rect(Vec2 u, double d0, double d1, double half) {
  const Vec2 n = left_normal(u);
  std::vector<Vec2> poly{u * d0 - n * half, u * d1 - n * half, u * d1 + n * half, u * d0 + n * half};
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  for (auto& p : poly) p = q6(p);
  return poly;
}

Lane make_lane(std::string id, std::vector<Vec2> pts, LaneType type, std::vector<LaneId> successors = {}) {
  Lane lane;
  lane.id = std::move(id);
  for (auto& p : pts) p = q6(p);
  lane.centerline = std::move(pts);
  lane.width = kLaneWidth;
  lane.boundary = offset_ribbon(lane.centerline, lane.width);
  for (auto& p : lane.boundary) p = q6(p);
  lane.lane_type = type;
  lane.successors = std::move(successors);
  return lane;
}

struct RouteDef {
  std::vector<LaneId> lanes;
  bool turning = false;
};

struct Blueprint {
  MapGraph map;
  std::vector<RouteDef> routes;
  std::vector<std::size_t> preferred_first;  // routes eligible for vehicle 0
  int per_route = 2;
  std::vector<LaneId> parking_spots;
  std::function<AreaType(Vec2)> area_truth;
};

// ---- layouts -----------------------------------------------------------------

Blueprint straight_road() {
  Blueprint bp;
  const double w = kLaneWidth, seg = 50.0, end_x = 150.0;
  auto& lanes = bp.map.lanes;
  for (int k = 0; k < 2; ++k) {
    const double y_e = -(k + 0.5) * w, y_w = (k + 0.5) * w;
    for (int s = 0; s < 3; ++s) {
      const std::string e_id = "e" + std::to_string(k) + "_" + std::to_string(s);
      std::vector<LaneId> e_succ;
      if (s < 2) e_succ.push_back("e" + std::to_string(k) + "_" + std::to_string(s + 1));
      else if (k == 1) e_succ.push_back("uturn");
      lanes.push_back(make_lane(e_id, line_points({seg * s, y_e}, {seg * (s + 1), y_e}), LaneType::Straight, e_succ));
    }
    for (int s = 0; s < 3; ++s) {
      const std::string w_id = "w" + std::to_string(k) + "_" + std::to_string(s);
      std::vector<LaneId> w_succ;
      if (s < 2) w_succ.push_back("w" + std::to_string(k) + "_" + std::to_string(s + 1));
      lanes.push_back(make_lane(w_id, line_points({end_x - seg * s, y_w}, {end_x - seg * (s + 1), y_w}),
                                LaneType::Straight, w_succ));
    }
  }
  const double r = 1.5 * w;
  lanes.push_back(make_lane("uturn", arc_points({end_x, 0.0}, {end_x, -r}, kPi, {end_x, r}), LaneType::UTurn, {"w1_0"}));

  bp.map.areas.push_back({"road", rect(-5.0, -8.0, end_x + 10.0, 8.0), AreaType::RegularRoad});
  bp.routes = {{{"e0_0", "e0_1", "e0_2"}, false},
               {{"e1_0", "e1_1", "e1_2", "uturn", "w1_0", "w1_1", "w1_2"}, true},
               {{"w0_0", "w0_1", "w0_2"}, false},
               {{"w1_0", "w1_1", "w1_2"}, false}};
  bp.preferred_first = {0};
  bp.per_route = 4;
  bp.area_truth = [](Vec2) { return AreaType::RegularRoad; };
  return bp;
}

struct Arm {
  std::string name;
  Vec2 u;  // outward unit direction
};

/// Signalized-style junction: three dedicated approach lanes per arm (left,
/// straight, right pockets) feeding three exit lanes, so no two connectors
/// share an endpoint.
Blueprint junction(const std::vector<Arm>& arms) {
  Blueprint bp;
  const double w = kLaneWidth, J = 14.0, arm_len = 50.0;
  auto in_point = [&](const Arm& a, int k, double d) { return a.u * d + left_normal(a.u) * ((k + 0.5) * w); };
  auto out_point = [&](const Arm& a, int k, double d) { return a.u * d - left_normal(a.u) * ((k + 0.5) * w); };

  std::map<std::string, Lane> incoming, outgoing;
  std::vector<Lane> connectors;
  for (const auto& a : arms) {
    for (const auto& b : arms) {
      if (a.name == b.name) continue;
      const double turn = rad2deg(shortest_arc(std::atan2(-a.u.y, -a.u.x), std::atan2(b.u.y, b.u.x)));
      int slot;
      LaneType type;
      std::string tag;
      if (std::abs(turn) < 1.0) {
        slot = 1, type = LaneType::Straight, tag = "S";
      } else if (turn > 0) {
        slot = 0, type = LaneType::LeftTurn, tag = "L";
      } else {
        slot = 2, type = LaneType::RightTurn, tag = "R";
      }
      const std::string in_id = a.name + "_in" + std::to_string(slot);
      const std::string out_id = b.name + "_out" + std::to_string(slot);
      const std::string c_id = a.name + "_" + b.name + "_" + tag;
      const Vec2 p0 = in_point(a, slot, J), p1 = out_point(b, slot, J);
      std::vector<Vec2> pts;
      if (type == LaneType::Straight) {
        pts = line_points(p0, p1);
      } else {
        const Vec2 d0 = a.u * -1.0;
        // tangent lines meet at q; symmetric slots make |q - p0| == |q - p1|
        const Vec2 d1 = b.u;
        const double denom = cross(d0, d1);
        const double t = cross(p1 - p0, d1) / denom;
        const Vec2 q = p0 + d0 * t;
        const double r = distance(q, p0);
        const Vec2 normal = type == LaneType::LeftTurn ? left_normal(d0) : left_normal(d0) * -1.0;
        pts = arc_points(p0 + normal * r, p0, type == LaneType::LeftTurn ? kPi / 2 : -kPi / 2, p1);
      }
      connectors.push_back(make_lane(c_id, pts, type, {out_id}));
      if (!incoming.count(in_id))
        incoming.emplace(in_id, make_lane(in_id, line_points(in_point(a, slot, J + arm_len), p0), LaneType::Straight, {}));
      incoming[in_id].successors.push_back(c_id);
      if (!outgoing.count(out_id))
        outgoing.emplace(out_id, make_lane(out_id, line_points(p1, out_point(b, slot, J + arm_len)), LaneType::Straight, {}));
      bp.routes.push_back({{in_id, c_id, out_id}, type != LaneType::Straight});
      if (type != LaneType::Straight) bp.preferred_first.push_back(bp.routes.size() - 1);
    }
  }
  for (auto& [id, lane] : incoming) bp.map.lanes.push_back(std::move(lane));
  for (auto& c : connectors) bp.map.lanes.push_back(std::move(c));
  for (auto& [id, lane] : outgoing) bp.map.lanes.push_back(std::move(lane));

  bp.map.areas.push_back({"junction", rect(-J, -J, J, J), AreaType::Intersection});
  for (const auto& a : arms)
    bp.map.areas.push_back({"road_" + a.name, arm_rect(a.u, J, J + arm_len + 2.0, 3 * w + 1.0), AreaType::RegularRoad});
  bp.per_route = 2;
  bp.area_truth = [J](Vec2 p) {
    return std::abs(p.x) <= J && std::abs(p.y) <= J ? AreaType::Intersection : AreaType::RegularRoad;
  };
  return bp;
}

Blueprint four_way() {
  return junction({{"s", {0, -1}}, {"e", {1, 0}}, {"n", {0, 1}}, {"w", {-1, 0}}});
}

Blueprint t_junction() { return junction({{"s", {0, -1}}, {"e", {1, 0}}, {"w", {-1, 0}}}); }

/// Single-lane roundabout driven counter-clockwise. Entries and exits meet the
/// ring at an angle rather than tangentially.
Blueprint roundabout() {
  Blueprint bp;
  const double w = kLaneWidth, ring_r = 18.0, arm_start = 30.0, arm_len = 50.0;
  const double offset = deg2rad(20.0);
  const double apothem = 24.0;
  const std::vector<Arm> arms{{"s", {0, -1}}, {"e", {1, 0}}, {"n", {0, 1}}, {"w", {-1, 0}}};

  auto ring_point = [&](double ang) { return Vec2{ring_r * std::cos(ang), ring_r * std::sin(ang)}; };
  struct Split {
    double angle;
    std::string arm;
    bool entry;
  };
  std::vector<Split> splits;
  for (const auto& a : arms) {
    const double phi = std::atan2(a.u.y, a.u.x);
    double e = phi + offset, x = phi - offset;
    if (e < 0) e += 2 * kPi;
    if (x < 0) x += 2 * kPi;
    splits.push_back({e, a.name, true});
    splits.push_back({x, a.name, false});
  }
  std::sort(splits.begin(), splits.end(), [](const Split& l, const Split& r) { return l.angle < r.angle; });
  const std::size_t n_ring = splits.size();
  auto ring_id = [](std::size_t i) { return "ring_" + std::to_string(i); };

  // ring segment i runs from splits[i] to splits[i+1]
  for (std::size_t i = 0; i < n_ring; ++i) {
    const double a0 = splits[i].angle;
    double a1 = splits[(i + 1) % n_ring].angle;
    if (a1 <= a0) a1 += 2 * kPi;
    std::vector<LaneId> succ{ring_id((i + 1) % n_ring)};
    const auto& next = splits[(i + 1) % n_ring];
    if (!next.entry) succ.push_back(next.arm + "_exit");
    bp.map.lanes.push_back(make_lane(ring_id(i), arc_points({0, 0}, ring_point(a0), a1 - a0, ring_point(a1)),
                                     LaneType::Other, succ));
  }
  for (const auto& a : arms) {
    const Vec2 n = left_normal(a.u);
    const Vec2 in_end = a.u * arm_start + n * (0.5 * w);
    const Vec2 out_start = a.u * arm_start - n * (0.5 * w);
    std::size_t entry_idx = 0, exit_idx = 0;
    for (std::size_t i = 0; i < n_ring; ++i) {
      if (splits[i].arm == a.name && splits[i].entry) entry_idx = i;
      if (splits[i].arm == a.name && !splits[i].entry) exit_idx = i;
    }
    bp.map.lanes.push_back(make_lane(a.name + "_in", line_points(a.u * (arm_start + arm_len) + n * (0.5 * w), in_end),
                                     LaneType::Straight, {a.name + "_entry"}));
    bp.map.lanes.push_back(make_lane(a.name + "_entry", line_points(in_end, ring_point(splits[entry_idx].angle)),
                                     LaneType::RightTurn, {ring_id(entry_idx)}));
    bp.map.lanes.push_back(make_lane(a.name + "_exit", line_points(ring_point(splits[exit_idx].angle), out_start),
                                     LaneType::RightTurn, {a.name + "_out"}));
    bp.map.lanes.push_back(make_lane(a.name + "_out", line_points(out_start, a.u * (arm_start + arm_len) - n * (0.5 * w)),
                                     LaneType::Straight, {}));
  }
  // routes: enter at arm a, leave at the k-th exit downstream (k = 1..4, 4 = u-turn)
  for (const auto& a : arms) {
    std::size_t i = 0;
    while (!(splits[i].arm == a.name && splits[i].entry)) ++i;
    std::vector<LaneId> lanes{a.name + "_in", a.name + "_entry"};
    int exits_seen = 0;
    for (std::size_t step = 0; step < 2 * n_ring && exits_seen < 4; ++step) {
      const std::size_t seg = (i + step) % n_ring;
      lanes.push_back(ring_id(seg));
      const auto& next = splits[(seg + 1) % n_ring];
      if (!next.entry) {
        ++exits_seen;
        auto route = lanes;
        route.push_back(next.arm + "_exit");
        route.push_back(next.arm + "_out");
        bp.routes.push_back({route, true});
        bp.preferred_first.push_back(bp.routes.size() - 1);
      }
    }
  }
  std::vector<Vec2> octagon;
  const double circum = apothem / std::cos(kPi / 8);
  for (int k = 0; k < 8; ++k) {
    const double ang = kPi / 8 + k * kPi / 4;
    octagon.push_back(q6({circum * std::cos(ang), circum * std::sin(ang)}));
  }
  bp.map.areas.push_back({"roundabout", octagon, AreaType::Roundabout});
  for (const auto& a : arms)
    bp.map.areas.push_back({"road_" + a.name, arm_rect(a.u, 20.0, arm_start + arm_len + 2.0, w + 1.0), AreaType::RegularRoad});
  bp.per_route = 1;
  bp.area_truth = [apothem](Vec2 p) {
    // regular octagon with flat sides facing the axes
    const double c = std::cos(kPi / 4);
    const bool inside = std::abs(p.x) <= apothem && std::abs(p.y) <= apothem && std::abs(c * (p.x + p.y)) <= apothem &&
                        std::abs(c * (p.x - p.y)) <= apothem;
    return inside ? AreaType::Roundabout : AreaType::RegularRoad;
  };
  return bp;
}

/// Surface lot: an access road into an aisle loop with a U-turn at the far
/// end, lined by perpendicular parking stalls.
Blueprint parking_lot() {
  Blueprint bp;
  auto& lanes = bp.map.lanes;
  const double aisle_len = 60.0, gap = 12.0, r = gap / 2.0;
  lanes.push_back(make_lane("road_in", line_points({-40, 0}, {0, 0}), LaneType::Straight, {"aisle_e"}));
  lanes.push_back(make_lane("aisle_e", line_points({0, 0}, {aisle_len, 0}), LaneType::Straight, {"aisle_turn"}));
  lanes.push_back(make_lane("aisle_turn", arc_points({aisle_len, r}, {aisle_len, 0}, kPi, {aisle_len, gap}),
                            LaneType::UTurn, {"aisle_w"}));
  lanes.push_back(make_lane("aisle_w", line_points({aisle_len, gap}, {0, gap}), LaneType::Straight, {"road_out"}));
  lanes.push_back(make_lane("road_out", line_points({0, gap}, {-40, gap}), LaneType::Straight, {}));
  for (int k = 0; k < 18; ++k) {
    const double x = 4.0 + 3.0 * k;
    Lane south = make_lane("stall_s" + std::to_string(k), line_points({x, -2.0}, {x, -8.0}), LaneType::Other);
    Lane north = make_lane("stall_n" + std::to_string(k), line_points({x, gap + 2.0}, {x, gap + 8.0}), LaneType::Other);
    south.width = north.width = 3.0;
    south.boundary = offset_ribbon(south.centerline, 3.0);
    north.boundary = offset_ribbon(north.centerline, 3.0);
    for (auto& p : south.boundary) p = q6(p);
    for (auto& p : north.boundary) p = q6(p);
    bp.parking_spots.push_back(south.id);
    bp.parking_spots.push_back(north.id);
    lanes.push_back(std::move(south));
    lanes.push_back(std::move(north));
  }
  bp.map.areas.push_back({"lot", rect(0, -10, 70, gap + 10), AreaType::ParkingArea});
  bp.map.areas.push_back({"access", rect(-45, -3, 0, gap + 3), AreaType::RegularRoad});
  bp.routes = {{{"road_in", "aisle_e", "aisle_turn", "aisle_w", "road_out"}, true}};
  bp.preferred_first = {0};
  bp.per_route = 4;
  bp.area_truth = [gap](Vec2 p) {
    return p.x >= 0 && p.x <= 70 && p.y >= -10 && p.y <= gap + 10 ? AreaType::ParkingArea : AreaType::RegularRoad;
  };
  return bp;
}

Blueprint build(Layout layout) {
  switch (layout) {
    case Layout::StraightRoad: return straight_road();
    case Layout::FourWay: return four_way();
    case Layout::TJunction: return t_junction();
    case Layout::Roundabout: return roundabout();
    case Layout::ParkingLot: return parking_lot();
  }
  throw SpecError("unknown layout");
}

// ---- motion along routes -------------------------------------------------------

struct SpeedProfile {
  double v0 = 0.0;
  double accel = 0.0;
  double v_cap = 14.0;

  double speed(double time) const { return std::clamp(v0 + accel * time, 0.0, std::max(v_cap, v0)); }
  double distance(double time) const {
    if (accel == 0.0) return v0 * time;
    const double v_end = accel > 0 ? std::max(v_cap, v0) : 0.0;
    const double t_sat = (v_end - v0) / accel;
    if (time <= t_sat) return v0 * time + 0.5 * accel * time * time;
    return v0 * t_sat + 0.5 * accel * t_sat * t_sat + v_end * (time - t_sat);
  }
};

SpeedProfile sample_profile(Rng& rng, bool allow_stationary) {
  SpeedProfile p;
  const double u = rng.uniform();
  if (allow_stationary && u < 0.1) return p;
  if (u < 0.6) {
    p.v0 = rng.uniform(3.0, 12.0);
  } else if (u < 0.8) {
    p.v0 = rng.uniform(2.0, 8.0);
    p.accel = rng.uniform(0.5, 2.0);
  } else {
    p.v0 = rng.uniform(6.0, 12.0);
    p.accel = -rng.uniform(0.5, 2.5);
  }
  return p;
}

struct RoutePath {
  std::vector<Vec2> pts;
  std::vector<double> cum;
  std::vector<double> lane_end;  // route arclength where each lane ends
  std::vector<LaneId> lanes;
  double length() const { return cum.back(); }

  std::size_t lane_at(double s) const {
    for (std::size_t k = 0; k + 1 < lane_end.size(); ++k)
      if (s < lane_end[k]) return k;
    return lane_end.size() - 1;
  }
  double away_from_joints(double s) const {
    for (std::size_t k = 0; k + 1 < lane_end.size(); ++k) {
      const double d = s - lane_end[k];
      if (std::abs(d) < kJointMargin) return lane_end[k] + (d < 0 ? -2 * kJointMargin : 2 * kJointMargin);
    }
    return s;
  }
};

RoutePath make_path(const MapGraph& map, const std::vector<LaneId>& lanes) {
  RoutePath rp;
  rp.lanes = lanes;
  for (const auto& id : lanes) {
    const Lane* lane = map.find_lane(id);
    const auto& c = lane->centerline;
    std::size_t start = rp.pts.empty() ? 0 : 1;
    if (!rp.pts.empty() && !(rp.pts.back() == c.front())) start = 0;
    for (std::size_t i = start; i < c.size(); ++i) rp.pts.push_back(c[i]);
    rp.lane_end.push_back(polyline_length(rp.pts));
  }
  rp.cum = cumulative_lengths(rp.pts);
  return rp;
}

/// Total signed turning of the route between two arclengths.
double route_turning(const RoutePath& rp, double s_from, double s_to) {
  double total = 0.0;
  double prev = heading_at_arclength(rp.pts, rp.cum, s_from);
  for (std::size_t i = 1; i + 1 < rp.pts.size(); ++i) {
    if (rp.cum[i] > s_from && rp.cum[i] <= s_to) {
      const double h = heading_at_arclength(rp.pts, rp.cum, rp.cum[i]);
      total += shortest_arc(prev, h);
      prev = h;
    }
  }
  return total;
}

struct Mover {
  std::size_t route = 0;
  double s0 = 0.0;
  SpeedProfile profile;
};

}  // namespace

std::string_view to_string(Layout l) {
  static constexpr std::array<std::string_view, 5> names{"straight", "four_way", "t_junction", "roundabout",
                                                         "parking_lot"};
  return names[static_cast<std::size_t>(l)];
}

Layout parse_layout(std::string_view s) {
  for (Layout l : kAllLayouts)
    if (to_string(l) == s) return l;
  if (s == "straight-road" || s == "straight_road") return Layout::StraightRoad;
  if (s == "4-way-intersection" || s == "four-way") return Layout::FourWay;
  if (s == "T-junction" || s == "t-junction") return Layout::TJunction;
  if (s == "parking-lot") return Layout::ParkingLot;
  throw SpecError("unknown layout '" + std::string(s) + "'");
}

int layout_capacity(Layout l) {
  switch (l) {
    case Layout::StraightRoad: return 16;
    case Layout::FourWay: return 24;
    case Layout::TJunction: return 12;
    case Layout::Roundabout: return 16;
    case Layout::ParkingLot: return 20;
  }
  return 0;
}

const VehicleGroundTruth* GroundTruth::find(std::string_view vehicle_id) const {
  for (const auto& v : vehicles)
    if (v.vehicle_id == vehicle_id) return &v;
  return nullptr;
}

SynthResult synth_scene(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.n_vehicles < 1) throw SpecError("synth_scene: need at least one vehicle");
  if (spec.n_vehicles > layout_capacity(spec.layout))
    throw SpecError("synth_scene: " + std::to_string(spec.n_vehicles) + " vehicles exceed the capacity of layout " +
                    std::string(to_string(spec.layout)) + " (" + std::to_string(layout_capacity(spec.layout)) + ")");
  if (spec.horizon < 51) throw SpecError("synth_scene: horizon must be >= 51 steps");
  if (!(spec.dt > 0.0)) throw SpecError("synth_scene: dt must be > 0");

  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(spec.layout) + 1));
  Blueprint bp = build(spec.layout);

  Scene scene;
  scene.scene_id = spec.scene_id.empty() ? std::string(to_string(spec.layout)) + "_" + std::to_string(seed) : spec.scene_id;
  scene.dt = spec.dt;
  scene.map = bp.map;

  std::vector<RoutePath> paths;
  for (const auto& r : bp.routes) paths.push_back(make_path(scene.map, r.lanes));

  const int T = spec.horizon;
  const double total_time = T * spec.dt;

  // choose movers and parked vehicles
  std::vector<Mover> movers;
  std::vector<int> mover_vehicle;  // vehicle index per mover
  std::vector<std::pair<int, LaneId>> parked;
  std::vector<int> route_load(bp.routes.size(), 0);
  std::vector<LaneId> free_spots = bp.parking_spots;
  rng.shuffle(free_spots);

  for (int v = 0; v < spec.n_vehicles; ++v) {
    const bool can_move = static_cast<int>(movers.size()) < static_cast<int>(bp.routes.size()) * bp.per_route;
    const bool park = v > 0 && !free_spots.empty() && (!can_move || rng.bernoulli(0.75));
    if (park) {
      parked.emplace_back(v, free_spots.back());
      free_spots.pop_back();
      continue;
    }
    Mover m;
    for (int attempt = 0; attempt < 64; ++attempt) {
      if (v == 0) {
        m.route = bp.preferred_first[rng.index(bp.preferred_first.size())];
      } else {
        m.route = rng.index(bp.routes.size());
      }
      if (route_load[m.route] >= bp.per_route) continue;
      m.profile = sample_profile(rng, v > 0);
      const double L = paths[m.route].length();
      double travel = m.profile.distance(total_time);
      if (travel > L - 1.0) {
        m.profile = SpeedProfile{(L - 1.0) * 0.9 / total_time, 0.0, 14.0};
        travel = m.profile.distance(total_time);
      }
      m.s0 = rng.uniform(0.0, L - 1.0 - travel);
      bool spaced = true;
      for (const auto& other : movers)
        if (other.route == m.route && std::abs(other.s0 - m.s0) < 15.0) spaced = false;
      if (spaced) break;
      if (attempt == 63) throw SpecError("synth_scene: could not place vehicle " + std::to_string(v));
    }
    ++route_load[m.route];
    movers.push_back(m);
    mover_vehicle.push_back(v);
  }

  GroundTruth gt;
  gt.scene_id = scene.scene_id;
  scene.tracks.resize(static_cast<std::size_t>(spec.n_vehicles));
  gt.vehicles.resize(static_cast<std::size_t>(spec.n_vehicles));
  // per vehicle, per step: route index + arclength (movers only)
  std::vector<std::vector<double>> arclen(static_cast<std::size_t>(spec.n_vehicles));
  std::vector<int> route_of(static_cast<std::size_t>(spec.n_vehicles), -1);

  for (std::size_t mi = 0; mi < movers.size(); ++mi) {
    const int v = mover_vehicle[mi];
    const auto& m = movers[mi];
    const auto& path = paths[m.route];
    auto& tr = scene.tracks[static_cast<std::size_t>(v)];
    tr.vehicle_id = "v" + std::to_string(v);
    route_of[static_cast<std::size_t>(v)] = static_cast<int>(m.route);
    gt.vehicles[static_cast<std::size_t>(v)].route = bp.routes[m.route].lanes;
    for (int t = 0; t <= T; ++t) {
      const double time = t * spec.dt;
      const double s = path.away_from_joints(m.s0 + m.profile.distance(time));
      arclen[static_cast<std::size_t>(v)].push_back(s);
      VehicleState st;
      st.position = q6(point_at_arclength(path.pts, path.cum, s));
      st.speed = quantize6(m.profile.speed(time));
      st.yaw = quantize_angle6(heading_at_arclength(path.pts, path.cum, s));
      tr.states.push_back(st);
    }
  }
  for (const auto& [v, spot_id] : parked) {
    const Lane* spot = scene.map.find_lane(spot_id);
    auto& tr = scene.tracks[static_cast<std::size_t>(v)];
    tr.vehicle_id = "v" + std::to_string(v);
    const Vec2 mid = (spot->centerline.front() + spot->centerline.back()) * 0.5;
    const Vec2 dir = spot->centerline.back() - spot->centerline.front();
    VehicleState st{q6(mid), 0.0, quantize_angle6(std::atan2(dir.y, dir.x))};
    tr.states.assign(static_cast<std::size_t>(T + 1), st);
    gt.vehicles[static_cast<std::size_t>(v)].route = {spot_id};
  }
  scene.ego_id = "v0";

  // ground truth
  const auto& rules = spec.rules;
  for (int v = 0; v < spec.n_vehicles; ++v) {
    const auto vi = static_cast<std::size_t>(v);
    auto& vg = gt.vehicles[vi];
    const auto& tr = scene.tracks[vi];
    vg.vehicle_id = tr.vehicle_id;
    const int r = route_of[vi];
    for (int t = 0; t <= T; ++t) {
      GroundTruthStep step;
      step.t = t;
      const auto& st = tr.states[static_cast<std::size_t>(t)];
      step.area_type = bp.area_truth(st.position);
      const int end_t = std::min(T, t + rules.horizon);
      const bool labelled = end_t - t >= rules.min_future;
      if (r >= 0) {
        const auto& path = paths[static_cast<std::size_t>(r)];
        const auto& s = arclen[vi];
        step.lane = path.lanes[path.lane_at(s[static_cast<std::size_t>(t)])];
        if (labelled) {
          const double disp = distance(tr.states[static_cast<std::size_t>(end_t)].position, st.position);
          const double turn = route_turning(path, s[static_cast<std::size_t>(t)], s[static_cast<std::size_t>(end_t)]);
          step.trajectory = categorize_motion(disp, turn, rules);
          for (int k = t; k <= end_t; ++k) {
            const LaneId& id = path.lanes[path.lane_at(s[static_cast<std::size_t>(k)])];
            if (step.trajectory_lanes.empty() || step.trajectory_lanes.back() != id) step.trajectory_lanes.push_back(id);
          }
        }
      } else {
        step.lane = vg.route.front();
        if (labelled) {
          step.trajectory = TrajectoryCategory::Stationary;
          step.trajectory_lanes = {*step.lane};
        }
      }
      step.lane_type = scene.map.find_lane(*step.lane)->lane_type;

      // neighbours by sector, using dot/cross tests in the vehicle frame
      const Vec2 fwd = unit_from_angle(st.yaw);
      std::array<std::vector<std::pair<double, std::string>>, 4> buckets;
      for (int o = 0; o < spec.n_vehicles; ++o) {
        if (o == v) continue;
        const Vec2 d = scene.tracks[static_cast<std::size_t>(o)].states[static_cast<std::size_t>(t)].position - st.position;
        const double dist = d.norm();
        if (dist > rules.neighbor_range) continue;
        const double f = dot(d, fwd), l = cross(fwd, d);
        Direction dir;
        if (f >= 0 && std::abs(l) <= f) dir = Direction::Front;
        else if (f <= 0 && std::abs(l) <= -f) dir = Direction::Behind;
        else dir = l > 0 ? Direction::Left : Direction::Right;
        buckets[static_cast<std::size_t>(dir)].emplace_back(dist, scene.tracks[static_cast<std::size_t>(o)].vehicle_id);
      }
      for (std::size_t k = 0; k < 4; ++k) {
        std::sort(buckets[k].begin(), buckets[k].end());
        for (auto& [d, id] : buckets[k]) step.neighbors[k].push_back(id);
      }
      vg.steps.push_back(std::move(step));
    }
  }
  validate(scene);
  return {std::move(scene), std::move(gt)};
}

Json ground_truth_to_json(const GroundTruth& gt) {
  Json vehicles = Json::array();
  for (const auto& v : gt.vehicles) {
    Json steps = Json::array();
    for (const auto& s : v.steps) {
      Json nb = Json::object();
      for (Direction d : kAllDirections) nb[std::string(to_string(d))] = s.neighbors[static_cast<std::size_t>(d)];
      steps.push_back({{"t", s.t},
                       {"area_type", std::string(to_string(s.area_type))},
                       {"lane", s.lane ? Json(*s.lane) : Json(nullptr)},
                       {"lane_type", std::string(to_string(s.lane_type))},
                       {"trajectory", s.trajectory ? Json(std::string(to_string(*s.trajectory))) : Json(nullptr)},
                       {"trajectory_lanes", s.trajectory_lanes},
                       {"neighbors", nb}});
    }
    vehicles.push_back({{"vehicle_id", v.vehicle_id}, {"route", v.route}, {"steps", steps}});
  }
  return {{"scene_id", gt.scene_id}, {"vehicles", vehicles}};
}

GroundTruth ground_truth_from_json(const Json& j) {
  try {
    GroundTruth gt;
    gt.scene_id = j.at("scene_id").get<std::string>();
    for (const auto& jv : j.at("vehicles")) {
      VehicleGroundTruth v;
      v.vehicle_id = jv.at("vehicle_id").get<std::string>();
      v.route = jv.at("route").get<std::vector<LaneId>>();
      for (const auto& js : jv.at("steps")) {
        GroundTruthStep s;
        s.t = js.at("t").get<int>();
        s.area_type = parse_area_type(js.at("area_type").get<std::string>());
        if (!js.at("lane").is_null()) s.lane = js.at("lane").get<std::string>();
        s.lane_type = parse_lane_type(js.at("lane_type").get<std::string>());
        if (!js.at("trajectory").is_null())
          s.trajectory = parse_trajectory_category(js.at("trajectory").get<std::string>());
        s.trajectory_lanes = js.at("trajectory_lanes").get<std::vector<LaneId>>();
        for (Direction d : kAllDirections)
          s.neighbors[static_cast<std::size_t>(d)] =
              js.at("neighbors").at(std::string(to_string(d))).get<std::vector<std::string>>();
        v.steps.push_back(std::move(s));
      }
      gt.vehicles.push_back(std::move(v));
    }
    return gt;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("ground truth: ") + e.what());
  }
}

}  // namespace bevkit
