#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bevkit/json_io.hpp"
#include "bevkit/labels.hpp"
#include "bevkit/scene.hpp"

namespace bevkit {

enum class Layout { StraightRoad = 0, FourWay, TJunction, Roundabout, ParkingLot };
inline constexpr std::array<Layout, 5> kAllLayouts{Layout::StraightRoad, Layout::FourWay, Layout::TJunction,
                                                   Layout::Roundabout, Layout::ParkingLot};

std::string_view to_string(Layout l);
/// Accepts the short names (`straight`, `four_way`, `t_junction`, `roundabout`,
/// `parking_lot`) and the long hyphenated forms. Throws SpecError otherwise.
Layout parse_layout(std::string_view s);
int layout_capacity(Layout l);

struct SynthSpec {
  Layout layout = Layout::FourWay;
  int n_vehicles = 4;
  int horizon = 60;  // steps; tracks hold horizon + 1 states
  double dt = 0.1;
  std::string scene_id;  // empty -> "<layout>_<seed>"
  LabelRules rules;
};

/// What the generator constructed for one vehicle at one timestep.
struct GroundTruthStep {
  int t = 0;
  AreaType area_type = AreaType::RegularRoad;
  std::optional<LaneId> lane;
  LaneType lane_type = LaneType::Other;
  std::optional<TrajectoryCategory> trajectory;  // absent when < min_future steps remain
  std::vector<LaneId> trajectory_lanes;          // lanes the route visits over the horizon
  std::array<std::vector<std::string>, 4> neighbors;  // indexed by Direction, sorted by distance
  friend bool operator==(const GroundTruthStep&, const GroundTruthStep&) = default;
};

struct VehicleGroundTruth {
  std::string vehicle_id;
  std::vector<LaneId> route;
  std::vector<GroundTruthStep> steps;
  friend bool operator==(const VehicleGroundTruth&, const VehicleGroundTruth&) = default;
};

struct GroundTruth {
  std::string scene_id;
  std::vector<VehicleGroundTruth> vehicles;
  const VehicleGroundTruth* find(std::string_view vehicle_id) const;
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SynthResult {
  Scene scene;
  GroundTruth truth;
};

/// Procedural scene with ground-truth labels. Pure in (spec, seed).
/// Throws SpecError for n < 1, n above the layout capacity, or horizon < 51.
SynthResult synth_scene(const SynthSpec& spec, std::uint64_t seed);

Json ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const Json& j);

}  // namespace bevkit
