#pragma once

#include <array>
#include <string_view>

namespace bevkit {

enum class TrajectoryCategory { Stationary = 0, Straight, LeftTurn, RightTurn, UTurn };
enum class Direction { Front = 0, Behind, Left, Right };

inline constexpr std::array<Direction, 4> kAllDirections{Direction::Front, Direction::Behind, Direction::Left,
                                                         Direction::Right};

std::string_view to_string(TrajectoryCategory c);
std::string_view to_string(Direction d);
TrajectoryCategory parse_trajectory_category(std::string_view s);
Direction parse_direction(std::string_view s);

/// Imperative maneuver phrase, e.g. "turn left".
std::string_view trajectory_phrase(TrajectoryCategory c);
/// Spatial phrase relative to the ego, e.g. "in front of".
std::string_view direction_phrase(Direction d);

/// Thresholds shared by the annotator and the synthetic ground truth.
struct LabelRules {
  int horizon = 50;                       // future steps for trajectory labels
  int min_future = 10;                    // fewer available steps -> no label
  double stationary_displacement = 2.0;   // m
  double straight_max_deg = 15.0;         // |dtheta| below -> straight
  double uturn_min_deg = 120.0;           // |dtheta| at or above -> u-turn
  double neighbor_range = 50.0;           // m
};

/// Category from net displacement (m) and unwrapped net yaw change (rad).
TrajectoryCategory categorize_motion(double displacement, double yaw_change, const LabelRules& rules);

}  // namespace bevkit
