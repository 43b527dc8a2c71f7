#include "bevkit/scene.hpp"

#include <cmath>
#include <set>

#include "bevkit/errors.hpp"

namespace bevkit {

namespace {
constexpr std::array<std::string_view, 5> kLaneNames{"straight", "left_turn", "right_turn", "u_turn",
                                                     "other"};
constexpr std::array<std::string_view, 4> kAreaNames{"intersection", "roundabout", "parking_area",
                                                     "regular_road"};

std::string idx(std::string_view base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

void check_polygon(const std::vector<Vec2>& poly, const std::string& path) {
  if (poly.size() < 3) throw ValidationError(path, "polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < poly.size(); ++i)
    if (!poly[i].finite()) throw ValidationError(idx(path, i), "non-finite coordinate");
  if (!is_simple_polygon(poly)) throw ValidationError(path, "polygon is not simple");
  if (!(signed_area(poly) > 0.0)) throw ValidationError(path, "polygon must be counter-clockwise with nonzero area");
}
}  // namespace

std::string_view to_string(LaneType t) { return kLaneNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(AreaType t) { return kAreaNames[static_cast<std::size_t>(t)]; }

LaneType parse_lane_type(std::string_view s) {
  for (std::size_t i = 0; i < kLaneNames.size(); ++i)
    if (kLaneNames[i] == s) return static_cast<LaneType>(i);
  throw ParseError("unknown lane_type '" + std::string(s) + "'");
}

AreaType parse_area_type(std::string_view s) {
  for (std::size_t i = 0; i < kAreaNames.size(); ++i)
    if (kAreaNames[i] == s) return static_cast<AreaType>(i);
  throw ParseError("unknown area_type '" + std::string(s) + "'");
}

const Lane* MapGraph::find_lane(std::string_view id) const {
  for (const auto& l : lanes)
    if (l.id == id) return &l;
  return nullptr;
}

const VehicleTrack* Scene::find_track(std::string_view id) const {
  for (const auto& t : tracks)
    if (t.vehicle_id == id) return &t;
  return nullptr;
}

const VehicleTrack& Scene::track(std::string_view id) const {
  if (const auto* t = find_track(id)) return *t;
  throw UnknownVehicle("unknown vehicle '" + std::string(id) + "' in scene " + scene_id);
}

void validate_state(const VehicleState& s, const std::string& path) {
  if (!s.position.finite() || !std::isfinite(s.speed) || !std::isfinite(s.yaw))
    throw ValidationError(path, "non-finite state");
  if (s.speed < 0.0) throw ValidationError(path + ".v", "speed must be >= 0");
  if (!(s.yaw > -kPi && s.yaw <= kPi)) throw ValidationError(path + ".yaw", "yaw must lie in (-pi, pi]");
}

void validate(const Scene& scene) {
  if (scene.scene_id.empty()) throw ValidationError("scene_id", "empty scene id");
  if (!(scene.dt > 0.0) || !std::isfinite(scene.dt)) throw ValidationError("dt", "dt must be > 0");

  const auto& map = scene.map;
  std::set<std::string> lane_ids;
  for (std::size_t i = 0; i < map.lanes.size(); ++i) {
    const auto& lane = map.lanes[i];
    const std::string path = idx("map.lanes", i);
    if (lane.id.empty()) throw ValidationError(path + ".id", "empty lane id");
    if (!lane_ids.insert(lane.id).second)
      throw ValidationError(path + ".id", "duplicate lane id '" + lane.id + "'");
  }
  std::set<std::string> area_ids;
  for (std::size_t i = 0; i < map.areas.size(); ++i) {
    const auto& area = map.areas[i];
    const std::string path = idx("map.areas", i);
    if (area.id.empty()) throw ValidationError(path + ".id", "empty area id");
    if (!area_ids.insert(area.id).second)
      throw ValidationError(path + ".id", "duplicate area id '" + area.id + "'");
    check_polygon(area.polygon, path + ".polygon");
  }
  for (std::size_t i = 0; i < map.lanes.size(); ++i) {
    const auto& lane = map.lanes[i];
    const std::string path = idx("map.lanes", i);
    if (!(lane.width > 0.0) || !std::isfinite(lane.width)) throw ValidationError(path + ".width", "width must be > 0");
    if (lane.centerline.size() < 2) throw ValidationError(path + ".centerline", "need at least 2 points");
    for (std::size_t k = 0; k < lane.centerline.size(); ++k)
      if (!lane.centerline[k].finite()) throw ValidationError(idx(path + ".centerline", k), "non-finite coordinate");
    check_polygon(lane.boundary, path + ".boundary");
    for (std::size_t k = 0; k < lane.centerline.size(); ++k)
      if (!polygon_contains(lane.boundary, lane.centerline[k]))
        throw ValidationError(idx(path + ".centerline", k), "centerline point outside lane boundary");
    for (std::size_t k = 0; k < lane.successors.size(); ++k)
      if (!lane_ids.count(lane.successors[k]))
        throw ValidationError(idx(path + ".successors", k), "unresolved successor '" + lane.successors[k] + "'");
    bool touches_area = false;
    for (const auto& area : map.areas) {
      if (polygons_intersect(lane.boundary, area.polygon)) {
        touches_area = true;
        break;
      }
    }
    if (!touches_area) throw ValidationError(path + ".boundary", "lane '" + lane.id + "' intersects no area");
  }

  std::set<std::string> vehicle_ids;
  for (std::size_t i = 0; i < scene.tracks.size(); ++i) {
    const auto& tr = scene.tracks[i];
    const std::string path = idx("tracks", i);
    if (tr.vehicle_id.empty()) throw ValidationError(path + ".vehicle_id", "empty vehicle id");
    if (!vehicle_ids.insert(tr.vehicle_id).second)
      throw ValidationError(path + ".vehicle_id", "duplicate vehicle id '" + tr.vehicle_id + "'");
    if (!(tr.length > 0.0) || !(tr.width > 0.0)) throw ValidationError(path, "vehicle dimensions must be > 0");
    if (tr.states.empty()) throw ValidationError(path + ".states", "track has no states");
    for (std::size_t k = 0; k < tr.states.size(); ++k) validate_state(tr.states[k], idx(path + ".states", k));
  }
  if (!vehicle_ids.count(scene.ego_id)) throw ValidationError("ego_id", "ego '" + scene.ego_id + "' has no track");
}

}  // namespace bevkit
