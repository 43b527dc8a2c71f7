#pragma once

// Independent re-derivations used by unit and acceptance tests. They read the
// generator's ground truth and raw scene geometry and share no code with the
// annotator or the question generator.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "bevkit/synth.hpp"
#include "bevkit/vqagen.hpp"

namespace oracle {

struct Box {
  int x0, y0, x1, y1;
};

/// Hundredths box of a lane outline, by the documented rule: pixel centers at
/// integers, outward rounding, clipped to the image.
inline std::optional<Box> lane_box(const bevkit::Lane& lane, const std::array<double, 6>& t, int side) {
  double mnx = 1e300, mny = 1e300, mxx = -1e300, mxy = -1e300;
  for (const auto& p : lane.boundary) {
    const double col = t[0] * p.x + t[1] * p.y + t[2];
    const double row = t[3] * p.x + t[4] * p.y + t[5];
    mnx = std::min(mnx, col);
    mxx = std::max(mxx, col);
    mny = std::min(mny, row);
    mxy = std::max(mxy, row);
  }
  const double u0 = (mnx + 0.5) / side, u1 = (mxx + 0.5) / side, v0 = (mny + 0.5) / side, v1 = (mxy + 0.5) / side;
  if (u1 <= 0 || v1 <= 0 || u0 >= 1 || v0 >= 1) return std::nullopt;
  auto lo = [](double v) { return std::clamp(static_cast<int>(std::floor(v * 100.0 + 1e-9)), 0, 100); };
  auto hi = [](double v) { return std::clamp(static_cast<int>(std::ceil(v * 100.0 - 1e-9)), 0, 100); };
  Box b{lo(u0), lo(v0), hi(u1), hi(v1)};
  if (b.x0 >= b.x1 || b.y0 >= b.y1) return std::nullopt;
  return b;
}

inline bool same(const Box& a, const bevkit::NormBBox& b) {
  return a.x0 == b.x0 && a.y0 == b.y0 && a.x1 == b.x1 && a.y1 == b.y1;
}

inline bool disjoint(const bevkit::NormBBox& a, const bevkit::NormBBox& b) {
  return std::min(a.x1, b.x1) <= std::max(a.x0, b.x0) || std::min(a.y1, b.y1) <= std::max(a.y0, b.y0);
}

inline std::string orientation_label(double ego_yaw, double other_yaw) {
  const double d = std::atan2(std::sin(other_yaw - ego_yaw), std::cos(other_yaw - ego_yaw)) * 180.0 / M_PI;
  if (d > -45.0 && d < 45.0) return "same_direction";
  if (d > 135.0 || d < -135.0) return "oncoming";
  return d > 0 ? "perpendicular_left" : "perpendicular_right";
}

/// Expected answer of `q` from the scene and its ground truth, or an empty
/// string when the item is malformed (choices not disjoint, box mismatch).
inline std::string rederive(const bevkit::QAItem& q, const bevkit::SynthResult& sr, const bevkit::ImageRef& img) {
  using namespace bevkit;
  const auto* vg = sr.truth.find(q.ego_id);
  if (!vg) return "";
  const GroundTruthStep* st = nullptr;
  for (const auto& s : vg->steps)
    if (s.t == q.timestep) st = &s;
  if (!st) return "";
  const auto co = img.transform.coefficients();

  auto box_of = [&](const LaneId& id) -> std::optional<Box> {
    const Lane* l = sr.scene.map.find_lane(id);
    return l ? lane_box(*l, co, img.side) : std::nullopt;
  };
  auto pick = [&](const Box& correct) -> std::string {
    if (!q.choices || !disjoint(q.choices->a, q.choices->b)) return "";
    if (same(correct, q.choices->a)) return "A";
    if (same(correct, q.choices->b)) return "B";
    return "";
  };

  switch (q.qtype) {
    case QType::AreaType:
      return std::string(to_string(st->area_type));
    case QType::LaneType:
      return std::string(to_string(st->lane_type));
    case QType::Location: {
      if (!st->lane) return "";
      const auto b = box_of(*st->lane);
      return b ? pick(*b) : "";
    }
    case QType::Navigation: {
      std::optional<Box> u;
      for (const auto& id : st->trajectory_lanes) {
        if (auto b = box_of(id)) {
          if (!u) u = *b;
          else u = Box{std::min(u->x0, b->x0), std::min(u->y0, b->y0), std::max(u->x1, b->x1), std::max(u->y1, b->y1)};
        }
      }
      return u ? pick(*u) : "";
    }
    case QType::Existence: {
      const auto d = static_cast<std::size_t>(parse_direction(q.slots.at("direction")));
      return st->neighbors[d].empty() ? "no" : "yes";
    }
    case QType::Orientation: {
      const auto d = static_cast<std::size_t>(parse_direction(q.slots.at("direction")));
      const auto& ids = st->neighbors[d];
      if (ids.empty()) return "none";
      const std::string& other = q.slots.at("rank") == "closest" ? ids.front() : ids.back();
      return orientation_label(sr.scene.track(q.ego_id).at(q.timestep).yaw, sr.scene.track(other).at(q.timestep).yaw);
    }
  }
  return "";
}

}  // namespace oracle
