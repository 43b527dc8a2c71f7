#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bevkit/labels.hpp"
#include "bevkit/scene.hpp"

namespace bevkit {

struct MotionConfig {
  int nav_lanes = 4;    // N_s
  int nav_points = 20;  // N_p
  int history = 10;     // H
  ActionLimits limits;
};

/// Explicit Euler step; position advances with the pre-update speed and yaw.
VehicleState step_unicycle(const VehicleState& s, const VehicleAction& a, double dt);

/// States s0..s_n for n actions.
std::vector<VehicleState> rollout(const VehicleState& s0, std::span<const VehicleAction> actions, double dt);

/// Speed and shortest-arc yaw differences over dt. Throws DegenerateInput for fewer than 2 states.
std::vector<VehicleAction> inverse_dynamics(std::span<const VehicleState> traj, double dt);

struct GlobalUnderstanding {
  std::array<float, 4> area{};  // one-hot by AreaType
  std::array<float, 5> lane{};  // one-hot by LaneType
  friend bool operator==(const GlobalUnderstanding&, const GlobalUnderstanding&) = default;
};

/// Up to N_s lane centerlines in the vehicle's own frame at t0 (x forward,
/// y left), each resampled to N_p points.
struct NavigationReasoning {
  std::vector<LaneId> lane_ids;
  std::vector<std::vector<Vec2>> centerlines;
  int slots = 4;
  bool empty() const { return centerlines.empty(); }
};

struct MapUnderstanding {
  GlobalUnderstanding global;
  NavigationReasoning navigation;
};

/// One-hots at t0 and the lanes the recorded future passes through, in order
/// of first visit. Throws UnknownVehicle.
MapUnderstanding extract_map_understanding_gt(const Scene& scene, std::string_view vehicle_id, int t0,
                                              int horizon = 50, const MotionConfig& cfg = {});

/// "<maneuver>, <speed>, <acceleration>", e.g. "go straight, at moderate speed, maintaining speed".
std::string describe_trajectory(std::span<const VehicleState> traj, double dt, const LabelRules& rules = {});

/// Per-vehicle condition inputs for a generative trajectory model.
struct ConditionBundle {
  std::string scene_id;
  int t0 = 0;
  int history = 10, nav_lanes = 4, nav_points = 20;
  std::vector<std::string> vehicle_ids;
  std::vector<float> history_states;    // (N, H, 4): x, y, v, yaw in the scene frame
  std::vector<float> global;            // (N, 9): area one-hot then lane one-hot
  std::vector<float> navigation;        // (N, N_s, N_p, 2): vehicle frame, zero where invalid
  std::vector<std::uint8_t> nav_valid;  // (N, N_s)
  std::vector<std::string> descriptions;
  friend bool operator==(const ConditionBundle&, const ConditionBundle&) = default;
};

/// Every vehicle present at t0, in scene order. Histories shorter than H are
/// front-padded with the earliest state.
ConditionBundle assemble_condition(const Scene& scene, int t0, const std::map<std::string, std::string>& descriptions,
                                   const MotionConfig& cfg = {}, int horizon = 50);

/// Writes manifest.json, history.f32, global.f32, navigation.f32, nav_valid.u8 and descriptions.txt.
void export_condition(const ConditionBundle& b, const std::filesystem::path& dir);
ConditionBundle load_condition(const std::filesystem::path& dir);

struct PlannerConfig {
  double lookahead = 6.0;  // m
  double speed_gain = 1.0;
  ActionLimits limits;
};

/// Pure pursuit along the concatenated navigation centerlines (vehicle frame,
/// so s0 sits at the origin facing +x) with proportional speed control.
/// Empty navigation gives zero actions.
std::vector<VehicleAction> lane_follow_plan(const VehicleState& s0, const NavigationReasoning& nav,
                                            double target_speed, int horizon, double dt,
                                            const PlannerConfig& cfg = {});

enum class NavMode { GroundTruth, None };

/// K planned futures of one vehicle from t0 in the scene frame, each horizon+1
/// states. Sample 0 targets the current speed; later samples jitter the target
/// speed by up to +-20 percent.
std::vector<std::vector<VehicleState>> plan_samples(const Scene& scene, std::string_view vehicle_id, int t0,
                                                    int horizon, int k, NavMode mode, std::uint64_t seed,
                                                    const MotionConfig& cfg = {}, const PlannerConfig& pcfg = {});

}  // namespace bevkit
