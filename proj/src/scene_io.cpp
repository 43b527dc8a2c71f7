#include "bevkit/scene_io.hpp"

#include "bevkit/errors.hpp"

namespace bevkit {

namespace {

template <typename T>
T field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + ": missing key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw ParseError(path + "." + key + ": wrong type");
  }
}

const Json& array_field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected object");
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) throw ParseError(path + ": missing array '" + key + "'");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected number");
  return j.get<double>();
}

std::vector<Vec2> points_from_json(const Json& arr, const std::string& path) {
  std::vector<Vec2> pts;
  pts.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& p = arr[i];
    const std::string pp = path + "[" + std::to_string(i) + "]";
    if (!p.is_array() || p.size() != 2) throw ParseError(pp + ": expected [x, y]");
    pts.push_back({number(p[0], pp), number(p[1], pp)});
  }
  return pts;
}

}  // namespace

Json points_to_json(const std::vector<Vec2>& pts) {
  Json arr = Json::array();
  for (const auto& p : pts) arr.push_back(Json::array({p.x, p.y}));
  return arr;
}

Json scene_to_json(const Scene& scene) {
  Json lanes = Json::array();
  for (const auto& l : scene.map.lanes) {
    Json jl = {{"id", l.id},
               {"lane_type", std::string(to_string(l.lane_type))},
               {"width", l.width},
               {"centerline", points_to_json(l.centerline)},
               {"boundary", points_to_json(l.boundary)},
               {"successors", l.successors}};
    if (!l.boundary_visible) jl["boundary_visible"] = false;
    lanes.push_back(std::move(jl));
  }
  Json areas = Json::array();
  for (const auto& a : scene.map.areas)
    areas.push_back({{"id", a.id}, {"area_type", std::string(to_string(a.area_type))}, {"polygon", points_to_json(a.polygon)}});
  Json tracks = Json::array();
  for (const auto& tr : scene.tracks) {
    Json states = Json::array();
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const auto& s = tr.states[k];
      states.push_back({{"t", tr.first_timestep + static_cast<int>(k)},
                        {"x", s.position.x},
                        {"y", s.position.y},
                        {"v", s.speed},
                        {"yaw", s.yaw}});
    }
    tracks.push_back({{"vehicle_id", tr.vehicle_id}, {"length", tr.length}, {"width", tr.width}, {"states", std::move(states)}});
  }
  return {{"schema_version", kSceneSchemaVersion},
          {"scene_id", scene.scene_id},
          {"dt", scene.dt},
          {"ego_id", scene.ego_id},
          {"map", {{"lanes", std::move(lanes)}, {"areas", std::move(areas)}}},
          {"tracks", std::move(tracks)}};
}

Scene scene_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("scene: expected a JSON object");
  const int version = field<int>(j, "schema_version", "scene");
  if (version != kSceneSchemaVersion) throw ParseError("scene: unsupported schema_version " + std::to_string(version));

  Scene scene;
  scene.scene_id = field<std::string>(j, "scene_id", "scene");
  scene.dt = number(j.at("dt"), "dt");
  scene.ego_id = field<std::string>(j, "ego_id", "scene");

  const auto map_it = j.find("map");
  if (map_it == j.end() || !map_it->is_object()) throw ParseError("scene: missing object 'map'");
  const auto& lanes = array_field(*map_it, "lanes", "map");
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const std::string path = "map.lanes[" + std::to_string(i) + "]";
    const auto& jl = lanes[i];
    Lane lane;
    lane.id = field<std::string>(jl, "id", path);
    lane.lane_type = parse_lane_type(field<std::string>(jl, "lane_type", path));
    lane.width = number(jl.at("width"), path + ".width");
    lane.centerline = points_from_json(array_field(jl, "centerline", path), path + ".centerline");
    lane.boundary = points_from_json(array_field(jl, "boundary", path), path + ".boundary");
    lane.successors = field<std::vector<std::string>>(jl, "successors", path);
    if (auto it = jl.find("boundary_visible"); it != jl.end()) {
      if (!it->is_boolean()) throw ParseError(path + ".boundary_visible: expected boolean");
      lane.boundary_visible = it->get<bool>();
    }
    scene.map.lanes.push_back(std::move(lane));
  }
  const auto& areas = array_field(*map_it, "areas", "map");
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const std::string path = "map.areas[" + std::to_string(i) + "]";
    const auto& ja = areas[i];
    Area area;
    area.id = field<std::string>(ja, "id", path);
    area.area_type = parse_area_type(field<std::string>(ja, "area_type", path));
    area.polygon = points_from_json(array_field(ja, "polygon", path), path + ".polygon");
    scene.map.areas.push_back(std::move(area));
  }

  const auto& tracks = array_field(j, "tracks", "scene");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const std::string path = "tracks[" + std::to_string(i) + "]";
    const auto& jt = tracks[i];
    VehicleTrack tr;
    tr.vehicle_id = field<std::string>(jt, "vehicle_id", path);
    tr.length = number(jt.at("length"), path + ".length");
    tr.width = number(jt.at("width"), path + ".width");
    const auto& states = array_field(jt, "states", path);
    for (std::size_t k = 0; k < states.size(); ++k) {
      const std::string sp = path + ".states[" + std::to_string(k) + "]";
      const auto& js = states[k];
      const int t = field<int>(js, "t", sp);
      if (k == 0) {
        tr.first_timestep = t;
      } else if (t != tr.first_timestep + static_cast<int>(k)) {
        throw ValidationError(sp + ".t", "timesteps must be strictly increasing and contiguous");
      }
      VehicleState s;
      s.position = {number(js.at("x"), sp + ".x"), number(js.at("y"), sp + ".y")};
      s.speed = number(js.at("v"), sp + ".v");
      s.yaw = number(js.at("yaw"), sp + ".yaw");
      tr.states.push_back(s);
    }
    scene.tracks.push_back(std::move(tr));
  }
  validate(scene);
  return scene;
}

std::string serialize_scene(const Scene& scene) { return canonical_dump(scene_to_json(scene)) + "\n"; }

Scene parse_scene(const std::string& text, const std::string& origin) {
  const Json j = parse_json(text, origin);
  try {
    return scene_from_json(j);
  } catch (const Json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) { return parse_scene(read_text_file(path), path.string()); }

void save_scene(const Scene& scene, const std::filesystem::path& path) { write_text_file(path, serialize_scene(scene)); }

}  // namespace bevkit
