#include "bevkit/annotator.hpp"

#include <algorithm>
#include <cmath>

#include "bevkit/errors.hpp"

namespace bevkit {

AnnotatorConfig annotator_config_from_json(const Json& j) {
  AnnotatorConfig cfg;
  if (!j.is_object()) throw ParseError("annotator config: expected an object");
  auto& r = cfg.rules;
  try {
    r.horizon = j.value("horizon", r.horizon);
    r.min_future = j.value("min_future", r.min_future);
    r.stationary_displacement = j.value("stationary_displacement", r.stationary_displacement);
    r.straight_max_deg = j.value("straight_max_deg", r.straight_max_deg);
    r.uturn_min_deg = j.value("uturn_min_deg", r.uturn_min_deg);
    r.neighbor_range = j.value("neighbor_range", r.neighbor_range);
    cfg.heading_tie_rad = j.value("heading_tie_rad", cfg.heading_tie_rad);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("annotator config: ") + e.what());
  }
  if (r.horizon < 1 || r.min_future < 1 || r.min_future > r.horizon)
    throw ConfigError("annotator config: need 1 <= min_future <= horizon");
  return cfg;
}

AreaType classify_area(const MapGraph& map, Vec2 p) {
  AreaType best = AreaType::RegularRoad;
  for (const auto& area : map.areas) {
    if (area_priority(area.area_type) >= area_priority(best)) continue;
    if (polygon_contains(area.polygon, p)) best = area.area_type;
  }
  return best;
}

LaneLocator::LaneLocator(const MapGraph& map, double heading_tie_rad) : map_(&map), tie_(heading_tie_rad) {
  boxes_.reserve(map.lanes.size());
  for (const auto& l : map.lanes) {
    Aabb b = bounding_box(l.boundary);
    // pad so the boundary tolerance of polygon_contains is not cut off
    b.min_x -= 1e-6;
    b.min_y -= 1e-6;
    b.max_x += 1e-6;
    b.max_y += 1e-6;
    boxes_.push_back(b);
  }
}

const Lane* LaneLocator::locate(const VehicleState& state) const {
  const Lane* best = nullptr;
  double best_mis = 0.0, best_lat = 0.0;
  for (std::size_t i = 0; i < map_->lanes.size(); ++i) {
    if (!boxes_[i].contains(state.position)) continue;
    const Lane& lane = map_->lanes[i];
    if (!polygon_contains(lane.boundary, state.position)) continue;
    const auto proj = project_onto_polyline(lane.centerline, state.position);
    const double mis = std::abs(shortest_arc(state.yaw, proj.heading));
    const double lat = proj.distance;
    bool take = best == nullptr;
    if (!take) {
      if (mis < best_mis - tie_) {
        take = true;
      } else if (std::abs(mis - best_mis) <= tie_) {
        take = lat < best_lat || (lat == best_lat && lane.id < best->id);
      }
    }
    if (take) {
      best = &lane;
      best_mis = mis;
      best_lat = lat;
    }
  }
  return best;
}

std::optional<LaneId> current_lane(const MapGraph& map, const VehicleState& state) {
  if (const Lane* l = LaneLocator(map).locate(state)) return l->id;
  return std::nullopt;
}

TrajectoryCategory classify_states(std::span<const VehicleState> states, const LabelRules& rules) {
  if (states.empty()) throw DegenerateInput("classify_states: no states");
  double yaw_change = 0.0;
  for (std::size_t i = 1; i < states.size(); ++i) yaw_change += shortest_arc(states[i - 1].yaw, states[i].yaw);
  const double disp = distance(states.front().position, states.back().position);
  return categorize_motion(disp, yaw_change, rules);
}

namespace {
/// [from_t, end_t] window; throws when too short.
int window_end(const VehicleTrack& track, int from_t, int horizon, const LabelRules& rules) {
  if (!track.has(from_t))
    throw InsufficientHorizon("vehicle " + track.vehicle_id + " has no state at t=" + std::to_string(from_t));
  const int end_t = std::min(track.last_timestep(), from_t + horizon);
  if (end_t - from_t < rules.min_future)
    throw InsufficientHorizon("vehicle " + track.vehicle_id + " has " + std::to_string(end_t - from_t) +
                              " future steps at t=" + std::to_string(from_t) + ", need " +
                              std::to_string(rules.min_future));
  return end_t;
}

std::span<const VehicleState> window(const VehicleTrack& track, int from_t, int end_t) {
  return std::span<const VehicleState>(track.states).subspan(static_cast<std::size_t>(from_t - track.first_timestep),
                                                             static_cast<std::size_t>(end_t - from_t + 1));
}

void push_collapsed(std::vector<LaneId>& out, const Lane* lane) {
  if (lane == nullptr) return;
  if (out.empty() || out.back() != lane->id) out.push_back(lane->id);
}
}  // namespace

TrajectoryCategory classify_trajectory(const VehicleTrack& track, int from_t, int horizon, const LabelRules& rules) {
  const int end_t = window_end(track, from_t, horizon, rules);
  return classify_states(window(track, from_t, end_t), rules);
}

std::vector<LaneId> trajectory_lanes(const MapGraph& map, const VehicleTrack& track, int from_t, int horizon,
                                     const LabelRules& rules) {
  const int end_t = window_end(track, from_t, horizon, rules);
  const LaneLocator locator(map);
  std::vector<LaneId> out;
  for (const auto& s : window(track, from_t, end_t)) push_collapsed(out, locator.locate(s));
  return out;
}

Direction bearing_sector(double beta) {
  constexpr double q = kPi / 4, tq = 3 * kPi / 4;
  if (std::abs(beta) <= q) return Direction::Front;
  if (std::abs(beta) >= tq) return Direction::Behind;
  return beta > 0 ? Direction::Left : Direction::Right;
}

RelativeCars relative_cars(const Scene& scene, std::string_view ego_id, int timestep, double range_limit) {
  const auto& ego_track = scene.track(ego_id);
  if (!ego_track.has(timestep))
    throw UnknownVehicle("vehicle " + std::string(ego_id) + " absent at t=" + std::to_string(timestep));
  const auto& ego = ego_track.at(timestep);
  const double c = std::cos(ego.yaw), s = std::sin(ego.yaw);
  std::array<std::vector<std::pair<double, std::string>>, 4> buckets;
  for (const auto& tr : scene.tracks) {
    if (tr.vehicle_id == ego_id || !tr.has(timestep)) continue;
    const Vec2 d = tr.at(timestep).position - ego.position;
    const double dist = d.norm();
    if (dist > range_limit) continue;
    const double fwd = c * d.x + s * d.y;
    const double left = -s * d.x + c * d.y;
    const Direction dir = bearing_sector(std::atan2(left, fwd));
    buckets[static_cast<std::size_t>(dir)].emplace_back(dist, tr.vehicle_id);
  }
  RelativeCars out;
  for (std::size_t k = 0; k < 4; ++k) {
    std::sort(buckets[k].begin(), buckets[k].end());
    for (auto& [d, id] : buckets[k]) out[k].push_back(std::move(id));
  }
  return out;
}

std::map<std::string, double> pairwise_distances(const Scene& scene, std::string_view ego_id, int timestep) {
  const auto& ego_track = scene.track(ego_id);
  if (!ego_track.has(timestep))
    throw UnknownVehicle("vehicle " + std::string(ego_id) + " absent at t=" + std::to_string(timestep));
  const Vec2 p = ego_track.at(timestep).position;
  std::map<std::string, double> out;
  for (const auto& tr : scene.tracks) {
    if (tr.vehicle_id == ego_id || !tr.has(timestep)) continue;
    out[tr.vehicle_id] = distance(p, tr.at(timestep).position);
  }
  return out;
}

std::vector<AnnotationRecord> annotate_scene(const Scene& scene, const AnnotatorConfig& cfg, std::size_t* skipped) {
  const auto& rules = cfg.rules;
  const LaneLocator locator(scene.map, cfg.heading_tie_rad);

  std::vector<const VehicleTrack*> order;
  for (const auto& tr : scene.tracks) order.push_back(&tr);
  std::sort(order.begin(), order.end(),
            [](const VehicleTrack* a, const VehicleTrack* b) { return a->vehicle_id < b->vehicle_id; });

  std::vector<AnnotationRecord> records;
  std::size_t n_skipped = 0;
  for (const VehicleTrack* tr : order) {
    std::vector<const Lane*> lanes;
    lanes.reserve(tr->states.size());
    for (const auto& s : tr->states) lanes.push_back(locator.locate(s));

    for (int t = tr->first_timestep; t <= tr->last_timestep(); ++t) {
      const int end_t = std::min(tr->last_timestep(), t + rules.horizon);
      if (end_t - t < rules.min_future) {
        ++n_skipped;
        continue;
      }
      const auto k0 = static_cast<std::size_t>(t - tr->first_timestep);
      const auto& st = tr->states[k0];
      AnnotationRecord rec;
      rec.scene_id = scene.scene_id;
      rec.vehicle_id = tr->vehicle_id;
      rec.timestep = t;
      rec.area_type = classify_area(scene.map, st.position);
      if (const Lane* l = lanes[k0]) {
        rec.current_lane = l->id;
        rec.lane_type = l->lane_type;
      }
      rec.trajectory = classify_states(window(*tr, t, end_t), rules);
      for (int k = t; k <= end_t; ++k) push_collapsed(rec.trajectory_lanes, lanes[static_cast<std::size_t>(k - tr->first_timestep)]);
      rec.relative_cars = relative_cars(scene, tr->vehicle_id, t, rules.neighbor_range);
      rec.distances = pairwise_distances(scene, tr->vehicle_id, t);
      records.push_back(std::move(rec));
    }
  }
  if (skipped) *skipped = n_skipped;
  return records;
}

Json record_to_json(const AnnotationRecord& r) {
  Json rel = Json::object();
  for (Direction d : kAllDirections) rel[std::string(to_string(d))] = r.relative_cars[static_cast<std::size_t>(d)];
  Json dist = Json::object();
  for (const auto& [id, d] : r.distances) dist[id] = d;
  return {{"scene_id", r.scene_id},
          {"vehicle_id", r.vehicle_id},
          {"timestep", r.timestep},
          {"area_type", std::string(to_string(r.area_type))},
          {"lane_type", std::string(to_string(r.lane_type))},
          {"current_lane", r.current_lane ? Json(*r.current_lane) : Json(nullptr)},
          {"trajectory", std::string(to_string(r.trajectory))},
          {"trajectory_lane", r.trajectory_lanes},
          {"relative_cars", rel},
          {"distance", dist}};
}

AnnotationRecord record_from_json(const Json& j) {
  try {
    AnnotationRecord r;
    r.scene_id = j.at("scene_id").get<std::string>();
    r.vehicle_id = j.at("vehicle_id").get<std::string>();
    r.timestep = j.at("timestep").get<int>();
    r.area_type = parse_area_type(j.at("area_type").get<std::string>());
    r.lane_type = parse_lane_type(j.at("lane_type").get<std::string>());
    if (!j.at("current_lane").is_null()) r.current_lane = j.at("current_lane").get<std::string>();
    r.trajectory = parse_trajectory_category(j.at("trajectory").get<std::string>());
    r.trajectory_lanes = j.at("trajectory_lane").get<std::vector<LaneId>>();
    for (Direction d : kAllDirections)
      r.relative_cars[static_cast<std::size_t>(d)] =
          j.at("relative_cars").at(std::string(to_string(d))).get<std::vector<std::string>>();
    for (const auto& [id, d] : j.at("distance").items()) r.distances[id] = d.get<double>();
    return r;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("annotation record: ") + e.what());
  }
}

}  // namespace bevkit
