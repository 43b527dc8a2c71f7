#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bevkit/geometry.hpp"

namespace bevkit {

// Enum order is the one-hot index order used by the map-understanding vectors.
enum class LaneType { Straight = 0, LeftTurn, RightTurn, UTurn, Other };
enum class AreaType { Intersection = 0, Roundabout, ParkingArea, RegularRoad };

inline constexpr std::array<LaneType, 5> kAllLaneTypes{LaneType::Straight, LaneType::LeftTurn,
                                                       LaneType::RightTurn, LaneType::UTurn,
                                                       LaneType::Other};
inline constexpr std::array<AreaType, 4> kAllAreaTypes{AreaType::Intersection, AreaType::Roundabout,
                                                       AreaType::ParkingArea, AreaType::RegularRoad};

std::string_view to_string(LaneType t);
std::string_view to_string(AreaType t);
/// Throws ParseError on unknown names.
LaneType parse_lane_type(std::string_view s);
AreaType parse_area_type(std::string_view s);

/// Lower value wins when a point lies in several areas.
inline int area_priority(AreaType t) { return static_cast<int>(t); }

struct VehicleState {
  Vec2 position;
  double speed = 0.0;  // m/s, >= 0
  double yaw = 0.0;    // rad, (-pi, pi]
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct VehicleAction {
  double accel = 0.0;     // m/s^2
  double yaw_rate = 0.0;  // rad/s
  friend bool operator==(const VehicleAction&, const VehicleAction&) = default;
};

struct ActionLimits {
  double max_accel = 6.0;
  double max_yaw_rate = 1.5;
};

using LaneId = std::string;

struct Lane {
  LaneId id;
  std::vector<Vec2> centerline;
  std::vector<Vec2> boundary;  // simple, CCW
  LaneType lane_type = LaneType::Straight;
  std::vector<LaneId> successors;
  double width = 3.5;
  // Render metadata only; cleared by lane-marking erasure noise.
  bool boundary_visible = true;
  friend bool operator==(const Lane&, const Lane&) = default;
};

struct Area {
  std::string id;
  std::vector<Vec2> polygon;  // simple, CCW
  AreaType area_type = AreaType::RegularRoad;
  friend bool operator==(const Area&, const Area&) = default;
};

struct MapGraph {
  std::vector<Lane> lanes;
  std::vector<Area> areas;

  const Lane* find_lane(std::string_view id) const;
  friend bool operator==(const MapGraph&, const MapGraph&) = default;
};

struct VehicleTrack {
  std::string vehicle_id;
  int first_timestep = 0;
  std::vector<VehicleState> states;  // contiguous from first_timestep
  double length = 4.7;
  double width = 2.0;

  int last_timestep() const { return first_timestep + static_cast<int>(states.size()) - 1; }
  bool has(int t) const { return t >= first_timestep && t <= last_timestep(); }
  const VehicleState& at(int t) const { return states[static_cast<std::size_t>(t - first_timestep)]; }
  friend bool operator==(const VehicleTrack&, const VehicleTrack&) = default;
};

struct Scene {
  std::string scene_id;
  MapGraph map;
  std::vector<VehicleTrack> tracks;
  double dt = 0.1;
  std::string ego_id;

  const VehicleTrack* find_track(std::string_view id) const;
  /// Throws UnknownVehicle.
  const VehicleTrack& track(std::string_view id) const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Checks every type invariant; throws ValidationError naming the offending field.
void validate(const Scene& scene);
void validate_state(const VehicleState& s, const std::string& path);

}  // namespace bevkit
