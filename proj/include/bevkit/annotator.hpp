#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevkit/json_io.hpp"
#include "bevkit/labels.hpp"
#include "bevkit/scene.hpp"

namespace bevkit {

struct AnnotatorConfig {
  LabelRules rules;
  // Heading misalignments closer than this are treated as equal when picking a lane.
  double heading_tie_rad = 1e-4;
};

/// Reads thresholds from a JSON object; absent keys keep their defaults.
AnnotatorConfig annotator_config_from_json(const Json& j);

/// Area type of the highest-priority polygon containing `p`; RegularRoad when none does.
AreaType classify_area(const MapGraph& map, Vec2 p);

/// Lane lookup with per-lane bounding boxes cached for repeated queries on one map.
class LaneLocator {
 public:
  explicit LaneLocator(const MapGraph& map, double heading_tie_rad = 1e-4);
  /// Among lanes containing the position: smallest heading misalignment, then
  /// smallest distance to the centerline, then smallest id.
  const Lane* locate(const VehicleState& state) const;

 private:
  const MapGraph* map_;
  std::vector<Aabb> boxes_;
  double tie_;
};

std::optional<LaneId> current_lane(const MapGraph& map, const VehicleState& state);

/// Category of a state sequence from its net displacement and unwrapped yaw change.
TrajectoryCategory classify_states(std::span<const VehicleState> states, const LabelRules& rules = {});

/// Uses states [from_t, from_t + horizon], truncated to what the track holds.
/// Throws InsufficientHorizon when fewer than rules.min_future steps remain.
TrajectoryCategory classify_trajectory(const VehicleTrack& track, int from_t, int horizon = 50,
                                       const LabelRules& rules = {});

/// current_lane at each state in [from_t, from_t + horizon]; consecutive repeats
/// collapsed and off-lane states dropped.
std::vector<LaneId> trajectory_lanes(const MapGraph& map, const VehicleTrack& track, int from_t, int horizon = 50,
                                     const LabelRules& rules = {});

using RelativeCars = std::array<std::vector<std::string>, 4>;  // indexed by Direction

/// Other vehicles within `range_limit` by bearing sector in the ego frame,
/// each list sorted by distance.
RelativeCars relative_cars(const Scene& scene, std::string_view ego_id, int timestep, double range_limit = 50.0);
Direction bearing_sector(double bearing_rad);

/// Center-to-center distance to every other vehicle present at `timestep`.
std::map<std::string, double> pairwise_distances(const Scene& scene, std::string_view ego_id, int timestep);

struct AnnotationRecord {
  std::string scene_id;
  std::string vehicle_id;
  int timestep = 0;
  AreaType area_type = AreaType::RegularRoad;
  LaneType lane_type = LaneType::Other;
  std::optional<LaneId> current_lane;
  TrajectoryCategory trajectory = TrajectoryCategory::Stationary;
  std::vector<LaneId> trajectory_lanes;
  RelativeCars relative_cars;
  std::map<std::string, double> distances;
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// One record per (vehicle, timestep) with at least rules.min_future future
/// steps, sorted by (vehicle_id, timestep). `skipped` receives the number of
/// timesteps without enough future.
std::vector<AnnotationRecord> annotate_scene(const Scene& scene, const AnnotatorConfig& cfg = {},
                                             std::size_t* skipped = nullptr);

Json record_to_json(const AnnotationRecord& r);
AnnotationRecord record_from_json(const Json& j);

}  // namespace bevkit
