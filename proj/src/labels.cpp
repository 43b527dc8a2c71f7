#include "bevkit/labels.hpp"

#include <cmath>
#include <string>

#include "bevkit/errors.hpp"
#include "bevkit/geometry.hpp"

namespace bevkit {

namespace {
constexpr std::array<std::string_view, 5> kTrajNames{"stationary", "straight", "left_turn", "right_turn", "u_turn"};
constexpr std::array<std::string_view, 4> kDirNames{"front", "behind", "left", "right"};
constexpr std::array<std::string_view, 5> kTrajPhrases{"remain stationary", "go straight", "turn left", "turn right",
                                                       "make a U-turn"};
constexpr std::array<std::string_view, 4> kDirPhrases{"in front of", "behind", "to the left of", "to the right of"};
}  // namespace

std::string_view to_string(TrajectoryCategory c) { return kTrajNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Direction d) { return kDirNames[static_cast<std::size_t>(d)]; }
std::string_view trajectory_phrase(TrajectoryCategory c) { return kTrajPhrases[static_cast<std::size_t>(c)]; }
std::string_view direction_phrase(Direction d) { return kDirPhrases[static_cast<std::size_t>(d)]; }

TrajectoryCategory parse_trajectory_category(std::string_view s) {
  for (std::size_t i = 0; i < kTrajNames.size(); ++i)
    if (kTrajNames[i] == s) return static_cast<TrajectoryCategory>(i);
  throw ParseError("unknown trajectory category '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
  for (std::size_t i = 0; i < kDirNames.size(); ++i)
    if (kDirNames[i] == s) return static_cast<Direction>(i);
  throw ParseError("unknown direction '" + std::string(s) + "'");
}

TrajectoryCategory categorize_motion(double displacement, double yaw_change, const LabelRules& rules) {
  if (displacement < rules.stationary_displacement) return TrajectoryCategory::Stationary;
  const double deg = rad2deg(yaw_change);
  if (std::abs(deg) < rules.straight_max_deg) return TrajectoryCategory::Straight;
  if (std::abs(deg) >= rules.uturn_min_deg) return TrajectoryCategory::UTurn;
  return deg > 0 ? TrajectoryCategory::LeftTurn : TrajectoryCategory::RightTurn;
}

}  // namespace bevkit
