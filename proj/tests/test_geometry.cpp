#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "bevkit/errors.hpp"
#include "bevkit/geometry.hpp"

using namespace bevkit;

TEST(Resample, TwoPointLineThreeSamples) {
  const std::vector<Vec2> line{{0, 0}, {10, 0}};
  const auto r = resample_polyline(line, 3);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], (Vec2{0, 0}));
  EXPECT_NEAR(r[1].x, 5.0, 1e-12);
  EXPECT_NEAR(r[1].y, 0.0, 1e-12);
  EXPECT_EQ(r[2], (Vec2{10, 0}));
}

TEST(Resample, UniformPolylineIsIdentity) {
  std::vector<Vec2> line;
  for (int i = 0; i <= 7; ++i) line.push_back({1.5 * i, -2.0});
  const auto r = resample_polyline(line, static_cast<int>(line.size()));
  ASSERT_EQ(r.size(), line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    EXPECT_NEAR(r[i].x, line[i].x, 1e-9);
    EXPECT_NEAR(r[i].y, line[i].y, 1e-9);
  }
}

TEST(Resample, LShapeHitsHandArclengths) {
  const std::vector<Vec2> line{{0, 0}, {4, 0}, {4, 4}};
  const auto r = resample_polyline(line, 5);
  // arclengths 0,2,4,6,8 along the L worked out by hand
  const std::vector<Vec2> expect{{0, 0}, {2, 0}, {4, 0}, {4, 2}, {4, 4}};
  ASSERT_EQ(r.size(), expect.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(r[i].x, expect[i].x, 1e-12);
    EXPECT_NEAR(r[i].y, expect[i].y, 1e-12);
  }
}

TEST(Resample, ZeroLengthThrows) {
  const std::vector<Vec2> line{{1, 1}, {1, 1}};
  EXPECT_THROW(resample_polyline(line, 4), DegenerateInput);
  const std::vector<Vec2> single{{1, 1}};
  EXPECT_THROW(resample_polyline(single, 4), DegenerateInput);
}

TEST(Resample, PreservesEndpointsAndLengthOnRandomLines) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec2> line;
    const int n = 2 + trial % 9;
    for (int i = 0; i < n; ++i) line.push_back({u(gen), u(gen)});
    const int m = 2 + trial % 40;
    const auto r = resample_polyline(line, m);
    ASSERT_EQ(static_cast<int>(r.size()), m);
    EXPECT_EQ(r.front(), line.front());
    EXPECT_EQ(r.back(), line.back());
    // equal spacing: every chord is at most the arclength step
    const double step = polyline_length(line) / (m - 1);
    for (int i = 1; i < m; ++i) EXPECT_LE(distance(r[i - 1], r[i]), step + 1e-9);
    // with the original vertices included the resampled points sit on the line
    for (const auto& p : r) EXPECT_LT(project_onto_polyline(line, p).distance, 1e-9);
  }
  // a dense resample of a polyline approaches its length from below
  const std::vector<Vec2> zig{{0, 0}, {3, 4}, {6, 0}, {9, 4}};
  const auto dense = resample_polyline(zig, 15 * 100 + 1);
  EXPECT_NEAR(polyline_length(dense), 15.0, 15.0 * 1e-6);
}

TEST(Angles, NormalizeIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_NEAR(normalize_angle(3 * kPi / 2), -kPi / 2, 1e-12);
  EXPECT_NEAR(normalize_angle(-7.0), -7.0 + 2 * kPi, 1e-12);
  for (double a = -20; a < 20; a += 0.37) {
    const double n = normalize_angle(a);
    EXPECT_GT(n, -kPi);
    EXPECT_LE(n, kPi);
    EXPECT_NEAR(std::remainder(n - a, 2 * kPi), 0.0, 1e-9);
  }
}

namespace {
// Winding-number membership, independent of the ray-casting implementation.
int winding(const std::vector<Vec2>& poly, Vec2 p) {
  int wn = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
    const double side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0) ++wn;
    } else if (b.y <= p.y && side < 0) {
      --wn;
    }
  }
  return wn;
}
}  // namespace

TEST(Polygon, ContainsAgreesWithWindingNumber) {
  // star-shaped concave polygon
  std::vector<Vec2> star;
  for (int k = 0; k < 10; ++k) {
    const double r = k % 2 == 0 ? 10.0 : 4.0;
    star.push_back({r * std::cos(k * kPi / 5), r * std::sin(k * kPi / 5)});
  }
  ASSERT_TRUE(is_ccw(star));
  ASSERT_TRUE(is_simple_polygon(star));
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-12, 12);
  for (int i = 0; i < 5000; ++i) {
    const Vec2 p{u(gen), u(gen)};
    EXPECT_EQ(polygon_contains(star, p), winding(star, p) != 0) << p.x << "," << p.y;
  }
}

TEST(Polygon, BoundaryCountsAsInside) {
  const std::vector<Vec2> sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_TRUE(polygon_contains(sq, {0, 1}));
  EXPECT_TRUE(polygon_contains(sq, {2, 2}));
  EXPECT_FALSE(polygon_contains(sq, {2.001, 1}));
}

TEST(Polygon, SimplicityAndOrientation) {
  const std::vector<Vec2> bow{{0, 0}, {2, 2}, {2, 0}, {0, 2}};
  EXPECT_FALSE(is_simple_polygon(bow));
  const std::vector<Vec2> cw{{0, 0}, {0, 2}, {2, 2}, {2, 0}};
  EXPECT_FALSE(is_ccw(cw));
  EXPECT_DOUBLE_EQ(signed_area(cw), -4.0);
}

TEST(Polyline, ProjectionFootAndHeading) {
  const std::vector<Vec2> line{{0, 0}, {10, 0}, {10, 10}};
  const auto p = project_onto_polyline(line, {5, 2});
  EXPECT_NEAR(p.distance, 2.0, 1e-12);
  EXPECT_NEAR(p.arclength, 5.0, 1e-12);
  EXPECT_NEAR(p.heading, 0.0, 1e-12);
  const auto q = project_onto_polyline(line, {12, 6});
  EXPECT_NEAR(q.distance, 2.0, 1e-12);
  EXPECT_NEAR(q.arclength, 16.0, 1e-12);
  EXPECT_NEAR(q.heading, kPi / 2, 1e-12);
}

TEST(Ribbon, ContainsCenterlineAndIsSimple) {
  std::vector<Vec2> arc;
  for (int i = 0; i <= 20; ++i) arc.push_back({10 * std::cos(i * kPi / 40), 10 * std::sin(i * kPi / 40)});
  const auto rib = offset_ribbon(arc, 3.5);
  EXPECT_TRUE(is_ccw(rib));
  EXPECT_TRUE(is_simple_polygon(rib));
  for (const auto& p : arc) EXPECT_TRUE(polygon_contains(rib, p));
  EXPECT_FALSE(polygon_contains(rib, {0, 0}));
}
