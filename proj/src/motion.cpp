#include "bevkit/motion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include "bevkit/annotator.hpp"
#include "bevkit/errors.hpp"
#include "bevkit/json_io.hpp"
#include "bevkit/rng.hpp"

namespace bevkit {

VehicleState step_unicycle(const VehicleState& s, const VehicleAction& a, double dt) {
  VehicleState n;
  n.position = {s.position.x + s.speed * std::cos(s.yaw) * dt, s.position.y + s.speed * std::sin(s.yaw) * dt};
  n.speed = std::max(0.0, s.speed + a.accel * dt);
  n.yaw = normalize_angle(s.yaw + a.yaw_rate * dt);
  return n;
}

std::vector<VehicleState> rollout(const VehicleState& s0, std::span<const VehicleAction> actions, double dt) {
  std::vector<VehicleState> out;
  out.reserve(actions.size() + 1);
  out.push_back(s0);
  for (const auto& a : actions) out.push_back(step_unicycle(out.back(), a, dt));
  return out;
}

std::vector<VehicleAction> inverse_dynamics(std::span<const VehicleState> traj, double dt) {
  if (traj.size() < 2) throw DegenerateInput("inverse_dynamics: need at least 2 states");
  if (!(dt > 0)) throw DegenerateInput("inverse_dynamics: dt must be positive");
  std::vector<VehicleAction> out;
  out.reserve(traj.size() - 1);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i)
    out.push_back({(traj[i + 1].speed - traj[i].speed) / dt, shortest_arc(traj[i].yaw, traj[i + 1].yaw) / dt});
  return out;
}

namespace {

Vec2 to_local(Vec2 p, const VehicleState& frame) { return rotate(p - frame.position, -frame.yaw); }

/// Distinct lanes under the states in [t0, t0 + horizon], by first visit.
std::vector<const Lane*> visited_lanes(const MapGraph& map, const VehicleTrack& track, int t0, int horizon) {
  const LaneLocator locator(map);
  std::vector<const Lane*> out;
  const int end = std::min(track.last_timestep(), t0 + horizon);
  for (int t = t0; t <= end; ++t) {
    const Lane* l = locator.locate(track.at(t));
    if (l && std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

}  // namespace

MapUnderstanding extract_map_understanding_gt(const Scene& scene, std::string_view vehicle_id, int t0, int horizon,
                                              const MotionConfig& cfg) {
  const auto& track = scene.track(vehicle_id);
  if (!track.has(t0))
    throw UnknownVehicle("vehicle " + std::string(vehicle_id) + " absent at t=" + std::to_string(t0));
  const VehicleState& s0 = track.at(t0);

  MapUnderstanding mu;
  mu.global.area[static_cast<std::size_t>(classify_area(scene.map, s0.position))] = 1.0f;
  const Lane* here = LaneLocator(scene.map).locate(s0);
  mu.global.lane[static_cast<std::size_t>(here ? here->lane_type : LaneType::Other)] = 1.0f;

  mu.navigation.slots = cfg.nav_lanes;
  for (const Lane* l : visited_lanes(scene.map, track, t0, horizon)) {
    if (static_cast<int>(mu.navigation.centerlines.size()) >= cfg.nav_lanes) break;
    std::vector<Vec2> local;
    local.reserve(l->centerline.size());
    for (const auto& p : l->centerline) local.push_back(to_local(p, s0));
    mu.navigation.lane_ids.push_back(l->id);
    mu.navigation.centerlines.push_back(resample_polyline(local, cfg.nav_points));
  }
  return mu;
}

std::string describe_trajectory(std::span<const VehicleState> traj, double dt, const LabelRules& rules) {
  if (traj.size() < 2) throw DegenerateInput("describe_trajectory: need at least 2 states");
  const TrajectoryCategory cat = classify_states(traj, rules);

  double mean = 0.0;
  for (const auto& s : traj) mean += s.speed;
  mean /= static_cast<double>(traj.size());
  std::string speed = "at slow speed";
  if (cat != TrajectoryCategory::Stationary) {
    if (mean > 8.0) speed = "at fast speed";
    else if (mean >= 2.0) speed = "at moderate speed";
  }

  // sign of each speed change, |accel| below the threshold counts as holding speed
  constexpr double kHold = 0.2;
  constexpr std::size_t kMinRun = 5;
  struct Run {
    int sign;
    std::size_t len;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double a = (traj[i + 1].speed - traj[i].speed) / dt;
    const int sign = a > kHold ? 1 : (a < -kHold ? -1 : 0);
    if (!runs.empty() && runs.back().sign == sign) ++runs.back().len;
    else runs.push_back({sign, 1});
  }
  auto merge_equal = [&runs] {
    std::vector<Run> m;
    for (const auto& r : runs) {
      if (!m.empty() && m.back().sign == r.sign) m.back().len += r.len;
      else m.push_back(r);
    }
    runs = std::move(m);
  };
  // fold short or surplus runs into their longer neighbour
  while (runs.size() > 1) {
    std::size_t shortest = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
      if (runs[i].len < runs[shortest].len) shortest = i;
    if (runs[shortest].len >= kMinRun && runs.size() <= 3) break;
    std::size_t into;
    if (shortest == 0) into = 1;
    else if (shortest + 1 == runs.size()) into = shortest - 1;
    else into = runs[shortest - 1].len >= runs[shortest + 1].len ? shortest - 1 : shortest + 1;
    runs[into].len += runs[shortest].len;
    runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(shortest));
    merge_equal();
  }

  std::string accel;
  if (runs.size() == 1) {
    accel = runs[0].sign > 0 ? "accelerating" : (runs[0].sign < 0 ? "decelerating" : "maintaining speed");
  } else {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (i) accel += " then ";
      accel += runs[i].sign > 0 ? "accelerate" : (runs[i].sign < 0 ? "decelerate" : "maintain speed");
    }
  }
  return std::string(trajectory_phrase(cat)) + ", " + speed + ", " + accel;
}

ConditionBundle assemble_condition(const Scene& scene, int t0, const std::map<std::string, std::string>& descriptions,
                                   const MotionConfig& cfg, int horizon) {
  ConditionBundle b;
  b.scene_id = scene.scene_id;
  b.t0 = t0;
  b.history = cfg.history;
  b.nav_lanes = cfg.nav_lanes;
  b.nav_points = cfg.nav_points;
  for (const auto& tr : scene.tracks) {
    if (!tr.has(t0)) continue;
    b.vehicle_ids.push_back(tr.vehicle_id);
    for (int k = cfg.history - 1; k >= 0; --k) {
      const int t = std::max(tr.first_timestep, t0 - k);
      const auto& s = tr.at(t);
      for (double v : {s.position.x, s.position.y, s.speed, s.yaw}) b.history_states.push_back(static_cast<float>(v));
    }
    const auto mu = extract_map_understanding_gt(scene, tr.vehicle_id, t0, horizon, cfg);
    b.global.insert(b.global.end(), mu.global.area.begin(), mu.global.area.end());
    b.global.insert(b.global.end(), mu.global.lane.begin(), mu.global.lane.end());
    for (int j = 0; j < cfg.nav_lanes; ++j) {
      const bool valid = static_cast<std::size_t>(j) < mu.navigation.centerlines.size();
      b.nav_valid.push_back(valid ? 1 : 0);
      for (int p = 0; p < cfg.nav_points; ++p) {
        const Vec2 q = valid ? mu.navigation.centerlines[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)]
                             : Vec2{0, 0};
        b.navigation.push_back(static_cast<float>(q.x));
        b.navigation.push_back(static_cast<float>(q.y));
      }
    }
    const auto it = descriptions.find(tr.vehicle_id);
    b.descriptions.push_back(it == descriptions.end() ? std::string() : it->second);
  }
  if (b.vehicle_ids.empty()) throw UnknownVehicle("no vehicle present at t=" + std::to_string(t0));
  return b;
}

namespace {

std::string pack_f32(const std::vector<float>& v) {
  std::string out(v.size() * 4, '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto u = std::bit_cast<std::uint32_t>(v[i]);
    for (int k = 0; k < 4; ++k) out[i * 4 + static_cast<std::size_t>(k)] = static_cast<char>((u >> (8 * k)) & 0xff);
  }
  return out;
}

std::vector<float> unpack_f32(const std::string& s, std::size_t expect, const std::string& name) {
  if (s.size() != expect * 4) throw ParseError(name + ": expected " + std::to_string(expect * 4) + " bytes");
  std::vector<float> out(expect);
  for (std::size_t i = 0; i < expect; ++i) {
    std::uint32_t u = 0;
    for (int k = 0; k < 4; ++k) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i * 4 + static_cast<std::size_t>(k)])) << (8 * k);
    out[i] = std::bit_cast<float>(u);
  }
  return out;
}

}  // namespace

void export_condition(const ConditionBundle& b, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto n = b.vehicle_ids.size();
  Json manifest{
      {"scene_id", b.scene_id},
      {"t0", b.t0},
      {"vehicle_order", b.vehicle_ids},
      {"arrays",
       {{"history", {{"file", "history.f32"}, {"dtype", "float32le"}, {"shape", {n, b.history, 4}},
                     {"fields", {"x", "y", "v", "yaw"}}, {"frame", "scene"}}},
        {"global", {{"file", "global.f32"}, {"dtype", "float32le"}, {"shape", {n, 9}},
                    {"fields", {"intersection", "roundabout", "parking_area", "regular_road", "straight", "left_turn",
                                "right_turn", "u_turn", "other"}}}},
        {"navigation", {{"file", "navigation.f32"}, {"dtype", "float32le"},
                        {"shape", {n, b.nav_lanes, b.nav_points, 2}}, {"frame", "vehicle at t0, x forward, y left"}}},
        {"navigation_valid", {{"file", "nav_valid.u8"}, {"dtype", "uint8"}, {"shape", {n, b.nav_lanes}}}}}},
      {"descriptions", "descriptions.txt"}};
  write_text_file(dir / "manifest.json", canonical_dump(manifest) + "\n");
  write_text_file(dir / "history.f32", pack_f32(b.history_states));
  write_text_file(dir / "global.f32", pack_f32(b.global));
  write_text_file(dir / "navigation.f32", pack_f32(b.navigation));
  write_text_file(dir / "nav_valid.u8", std::string(b.nav_valid.begin(), b.nav_valid.end()));
  std::string lines;
  for (const auto& d : b.descriptions) lines += d + "\n";
  write_text_file(dir / "descriptions.txt", lines);
}

ConditionBundle load_condition(const std::filesystem::path& dir) {
  const Json m = parse_json(read_text_file(dir / "manifest.json"), (dir / "manifest.json").string());
  ConditionBundle b;
  try {
    b.scene_id = m.at("scene_id").get<std::string>();
    b.t0 = m.at("t0").get<int>();
    b.vehicle_ids = m.at("vehicle_order").get<std::vector<std::string>>();
    const auto& arr = m.at("arrays");
    b.history = arr.at("history").at("shape").at(1).get<int>();
    b.nav_lanes = arr.at("navigation").at("shape").at(1).get<int>();
    b.nav_points = arr.at("navigation").at("shape").at(2).get<int>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("condition manifest: ") + e.what());
  }
  const std::size_t n = b.vehicle_ids.size();
  const auto h = static_cast<std::size_t>(b.history), s = static_cast<std::size_t>(b.nav_lanes),
             p = static_cast<std::size_t>(b.nav_points);
  b.history_states = unpack_f32(read_text_file(dir / "history.f32"), n * h * 4, "history.f32");
  b.global = unpack_f32(read_text_file(dir / "global.f32"), n * 9, "global.f32");
  b.navigation = unpack_f32(read_text_file(dir / "navigation.f32"), n * s * p * 2, "navigation.f32");
  const std::string valid = read_text_file(dir / "nav_valid.u8");
  if (valid.size() != n * s) throw ParseError("nav_valid.u8: wrong size");
  b.nav_valid.assign(valid.begin(), valid.end());
  std::istringstream in(read_text_file(dir / "descriptions.txt"));
  for (std::string line; std::getline(in, line);) b.descriptions.push_back(line);
  if (b.descriptions.size() != n) throw ParseError("descriptions.txt: expected one line per vehicle");
  return b;
}

namespace {

/// Reference path for pure pursuit with a progress-limited projection.
class PursuitPath {
 public:
  explicit PursuitPath(const NavigationReasoning& nav) {
    for (const auto& line : nav.centerlines)
      for (const auto& p : line)
        if (pts_.empty() || distance(pts_.back(), p) > 1e-6) pts_.push_back(p);
    if (pts_.size() >= 2) cum_ = cumulative_lengths(pts_);
  }
  bool usable() const { return pts_.size() >= 2 && cum_.back() > 0; }
  double total() const { return cum_.back(); }

  /// Arclength of the closest point among segments overlapping [lo, hi].
  double project(Vec2 p, double lo, double hi) const {
    double best_d = std::numeric_limits<double>::infinity(), best_s = lo;
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      if (cum_[i + 1] < lo || cum_[i] > hi) continue;
      const Vec2 a = pts_[i], ab = pts_[i + 1] - a;
      const double len2 = dot(ab, ab);
      const double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
      const double d = distance(p, a + ab * t);
      if (d < best_d) {
        best_d = d;
        best_s = cum_[i] + t * (cum_[i + 1] - cum_[i]);
      }
    }
    return best_s;
  }

  Vec2 at(double s) const {
    if (s <= total()) return point_at_arclength(pts_, cum_, std::max(0.0, s));
    const Vec2 end = pts_.back();
    return end + unit_from_angle(heading_at_arclength(pts_, cum_, total())) * (s - total());
  }

 private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

}  // namespace

std::vector<VehicleAction> lane_follow_plan(const VehicleState& s0, const NavigationReasoning& nav,
                                            double target_speed, int horizon, double dt, const PlannerConfig& cfg) {
  std::vector<VehicleAction> actions(static_cast<std::size_t>(std::max(0, horizon)));
  const PursuitPath path(nav);
  if (!path.usable()) return actions;

  VehicleState s = s0;
  double progress = path.project(s.position, 0.0, path.total());
  for (auto& a : actions) {
    progress = path.project(s.position, progress - 2.0, progress + s.speed * dt * 3.0 + 5.0);
    const Vec2 target = path.at(progress + cfg.lookahead);
    const Vec2 d = target - s.position;
    const double dist = d.norm();
    double omega = 0.0;
    if (dist > 1e-6) {
      const double alpha = shortest_arc(s.yaw, std::atan2(d.y, d.x));
      omega = s.speed * 2.0 * std::sin(alpha) / dist;
    }
    a.yaw_rate = std::clamp(omega, -cfg.limits.max_yaw_rate, cfg.limits.max_yaw_rate);
    a.accel = std::clamp(cfg.speed_gain * (target_speed - s.speed), -cfg.limits.max_accel, cfg.limits.max_accel);
    s = step_unicycle(s, a, dt);
  }
  return actions;
}

std::vector<std::vector<VehicleState>> plan_samples(const Scene& scene, std::string_view vehicle_id, int t0,
                                                    int horizon, int k, NavMode mode, std::uint64_t seed,
                                                    const MotionConfig& cfg, const PlannerConfig& pcfg) {
  if (k < 1) throw ConfigError("sample count must be >= 1");
  const auto& track = scene.track(vehicle_id);
  if (!track.has(t0))
    throw UnknownVehicle("vehicle " + std::string(vehicle_id) + " absent at t=" + std::to_string(t0));
  const VehicleState& s0 = track.at(t0);
  NavigationReasoning nav;
  if (mode == NavMode::GroundTruth) nav = extract_map_understanding_gt(scene, vehicle_id, t0, horizon, cfg).navigation;
  const VehicleState local{{0.0, 0.0}, s0.speed, 0.0};

  Rng rng(derive_seed(seed, hash_string(std::string(vehicle_id))));
  std::vector<std::vector<VehicleState>> out;
  for (int i = 0; i < k; ++i) {
    const double target = i == 0 ? s0.speed : s0.speed * (1.0 + rng.uniform(-0.2, 0.2));
    const auto actions = lane_follow_plan(local, nav, target, horizon, scene.dt, pcfg);
    out.push_back(rollout(s0, actions, scene.dt));
  }
  return out;
}

}  // namespace bevkit
