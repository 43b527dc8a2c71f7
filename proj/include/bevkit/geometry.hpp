#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace bevkit {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;

  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline Vec2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
/// Counter-clockwise rotation by `theta`.
inline Vec2 rotate(Vec2 v, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}
inline Vec2 left_normal(Vec2 v) { return {-v.y, v.x}; }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);
/// Signed smallest rotation taking `from` to `to`, in (-pi, pi].
inline double shortest_arc(double from, double to) { return normalize_angle(to - from); }
inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Rounds to the 6-decimal grid used by the canonical file format.
inline double quantize6(double v) {
  const double q = std::round(v * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;  // no negative zero
}
/// Quantizes an angle while keeping it inside (-pi, pi].
double quantize_angle6(double theta);

struct Aabb {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool contains(Vec2 p) const { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
  bool overlaps(const Aabb& o) const {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
};
Aabb bounding_box(std::span<const Vec2> pts);

// ---- polylines -------------------------------------------------------------

double polyline_length(std::span<const Vec2> line);
/// Cumulative arclength at each vertex; front() == 0.
std::vector<double> cumulative_lengths(std::span<const Vec2> line);

/// `n_points` samples equally spaced by arclength. Endpoints are copied exactly.
/// Throws DegenerateInput for fewer than 2 points, n_points < 2, or zero length.
std::vector<Vec2> resample_polyline(std::span<const Vec2> line, int n_points);

struct PolylineProjection {
  double distance = 0.0;   // Euclidean distance from the query to the polyline
  double arclength = 0.0;  // arclength of the foot point
  std::size_t segment = 0;
  double heading = 0.0;    // direction of the closest segment
  Vec2 foot;
};
PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p);

/// Point at arclength `s` (clamped to [0, length]); `cum` from cumulative_lengths.
Vec2 point_at_arclength(std::span<const Vec2> line, std::span<const double> cum, double s);
/// Direction of the segment containing arclength `s`.
double heading_at_arclength(std::span<const Vec2> line, std::span<const double> cum, double s);

// ---- polygons --------------------------------------------------------------

double signed_area(std::span<const Vec2> poly);
inline bool is_ccw(std::span<const Vec2> poly) { return signed_area(poly) > 0.0; }
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
/// True when no two non-adjacent edges intersect.
bool is_simple_polygon(std::span<const Vec2> poly);
/// Closed containment: points on the boundary count as inside.
bool polygon_contains(std::span<const Vec2> poly, Vec2 p);
bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

/// CCW ribbon of total width `width` around a centerline, using mitred joints.
std::vector<Vec2> offset_ribbon(std::span<const Vec2> centerline, double width);

}  // namespace bevkit
