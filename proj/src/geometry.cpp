#include "bevkit/geometry.hpp"

#include <algorithm>
#include <limits>

#include "bevkit/errors.hpp"

namespace bevkit {

double normalize_angle(double theta) {
  double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double quantize_angle6(double theta) {
  double q = quantize6(normalize_angle(theta));
  // 6-decimal rounding of +-pi lands outside the interval
  if (q > kPi) q = 3.141592;
  if (q <= -kPi) q = -3.141592;
  return q;
}

Aabb bounding_box(std::span<const Vec2> pts) {
  Aabb b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : pts) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

double polyline_length(std::span<const Vec2> line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) len += distance(line[i - 1], line[i]);
  return len;
}

std::vector<double> cumulative_lengths(std::span<const Vec2> line) {
  std::vector<double> cum(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) cum[i] = cum[i - 1] + distance(line[i - 1], line[i]);
  return cum;
}

std::vector<Vec2> resample_polyline(std::span<const Vec2> line, int n_points) {
  if (line.size() < 2) throw DegenerateInput("resample_polyline: need at least 2 points");
  if (n_points < 2) throw DegenerateInput("resample_polyline: n_points must be >= 2");
  const auto cum = cumulative_lengths(line);
  const double total = cum.back();
  if (!(total > 0.0)) throw DegenerateInput("resample_polyline: zero-length polyline");

  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(n_points));
  out.push_back(line.front());
  std::size_t seg = 1;
  for (int i = 1; i + 1 < n_points; ++i) {
    const double s = total * static_cast<double>(i) / static_cast<double>(n_points - 1);
    while (seg + 1 < line.size() && cum[seg] < s) ++seg;
    const double seg_len = cum[seg] - cum[seg - 1];
    const double t = seg_len > 0.0 ? (s - cum[seg - 1]) / seg_len : 0.0;
    out.push_back(line[seg - 1] + (line[seg] - line[seg - 1]) * t);
  }
  out.push_back(line.back());
  return out;
}

PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 a = line[i], b = line[i + 1];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double len = std::sqrt(len2);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 foot = a + ab * t;
    const double d = distance(p, foot);
    if (d < best.distance) {
      best.distance = d;
      best.arclength = acc + t * len;
      best.segment = i;
      best.heading = std::atan2(ab.y, ab.x);
      best.foot = foot;
    }
    acc += len;
  }
  if (line.size() == 1) {
    best.distance = distance(p, line[0]);
    best.foot = line[0];
  }
  return best;
}

namespace {
std::size_t segment_for(std::span<const double> cum, double s) {
  // first vertex index i >= 1 with cum[i] >= s
  auto it = std::lower_bound(cum.begin() + 1, cum.end(), s);
  if (it == cum.end()) --it;
  return static_cast<std::size_t>(it - cum.begin());
}
}  // namespace

Vec2 point_at_arclength(std::span<const Vec2> line, std::span<const double> cum, double s) {
  s = std::clamp(s, 0.0, cum.back());
  const std::size_t i = segment_for(cum, s);
  const double seg = cum[i] - cum[i - 1];
  const double t = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
  return line[i - 1] + (line[i] - line[i - 1]) * t;
}

double heading_at_arclength(std::span<const Vec2> line, std::span<const double> cum, double s) {
  s = std::clamp(s, 0.0, cum.back());
  std::size_t i = segment_for(cum, s);
  // prefer the segment that starts at a vertex so headings change right at the joint
  if (i + 1 < line.size() && s >= cum[i]) ++i;
  const Vec2 d = line[i] - line[i - 1];
  return std::atan2(d.y, d.x);
}

double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

namespace {
int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}
bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}
}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + ab * t);
}

bool is_simple_polygon(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool polygon_contains(std::span<const Vec2> poly, Vec2 p) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if (point_segment_distance(p, a, b) <= 1e-9) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (!bounding_box(a).overlaps(bounding_box(b))) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
    }
  }
  return polygon_contains(a, b.front()) || polygon_contains(b, a.front());
}

std::vector<Vec2> offset_ribbon(std::span<const Vec2> centerline, double width) {
  const std::size_t n = centerline.size();
  const double half = 0.5 * width;
  std::vector<Vec2> left(n), right(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 dir_in = i > 0 ? centerline[i] - centerline[i - 1] : centerline[1] - centerline[0];
    Vec2 dir_out = i + 1 < n ? centerline[i + 1] - centerline[i] : dir_in;
    dir_in = dir_in * (1.0 / dir_in.norm());
    dir_out = dir_out * (1.0 / dir_out.norm());
    const Vec2 n_in = left_normal(dir_in), n_out = left_normal(dir_out);
    Vec2 miter = n_in + n_out;
    const double m = miter.norm();
    miter = m > 1e-12 ? miter * (1.0 / m) : n_in;
    const double scale = half / std::max(dot(miter, n_in), 0.25);
    left[i] = centerline[i] + miter * scale;
    right[i] = centerline[i] - miter * scale;
  }
  std::vector<Vec2> poly;
  poly.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) poly.push_back(right[i]);
  for (std::size_t i = n; i-- > 0;) poly.push_back(left[i]);
  return poly;
}

}  // namespace bevkit
