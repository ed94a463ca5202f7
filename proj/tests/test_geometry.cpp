#include <cmath>
#include <random>

#include "doctest.h"
#include "rvp/errors.hpp"
#include "rvp/geometry.hpp"

using namespace rvp;

namespace {

bool near(const Point2& a, const Point2& b, double tol) { return distance(a, b) <= tol; }

}  // namespace

TEST_CASE("normalize_angle maps to (-pi, pi]") {
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(normalize_angle(0.25) == 0.25);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    double a = normalize_angle(u(rng));
    CHECK(a > -kPi);
    CHECK(a <= kPi);
  }
}

TEST_CASE("make_segment rejects degenerate input") {
  CHECK_THROWS_AS(make_segment({0, 0}, {0, 0}), InvalidArgument);
  CHECK_THROWS_AS(make_segment({0, 0}, {NAN, 0}), InvalidArgument);
  CHECK(make_segment({0, 0}, {1, 0}).length() == 1.0);
}

TEST_CASE("circle_segment_intersections examples") {
  const Circle unit{{0, 0}, 1};
  auto two = circle_segment_intersections(unit, {{-2, 0}, {2, 0}});
  REQUIRE(two.size() == 2);
  CHECK(near(two[0], {-1, 0}, 1e-12));
  CHECK(near(two[1], {1, 0}, 1e-12));
  CHECK(circle_segment_intersections(unit, {{2, 2}, {3, 3}}).empty());
  auto one = circle_segment_intersections(unit, {{0, 0}, {2, 0}});
  REQUIRE(one.size() == 1);
  CHECK(near(one[0], {1, 0}, 1e-12));
  // Tangency is kept.
  auto tangent = circle_segment_intersections(unit, {{-1, 1}, {1, 1}});
  REQUIRE(tangent.size() == 1);
  CHECK(near(tangent[0], {0, 1}, 1e-9));
}

TEST_CASE("circle_segment_intersections matches a dense-sampling crossing oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_real_distribution<double> ur(0.2, 2.5);
  constexpr int kSamples = 10000;
  int checked = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const Circle c{{u(rng), u(rng)}, ur(rng)};
    const Segment s{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const double len = s.length();
    if (len < 1e-3) continue;
    // Near-tangent and endpoint-on-circle cases are below the oracle's resolution.
    const double t_foot = closest_parameter(c.center, s);
    if (t_foot > 0.0 && t_foot < 1.0 && std::abs(distance(s.at(t_foot), c.center) - c.radius) < 1e-5) continue;
    if (std::abs(distance(s.a, c.center) - c.radius) < 1e-9 || std::abs(distance(s.b, c.center) - c.radius) < 1e-9)
      continue;
    int crossings = 0;
    double prev = distance(s.a, c.center) - c.radius;
    for (int i = 1; i <= kSamples; ++i) {
      const double g = distance(s.at(static_cast<double>(i) / kSamples), c.center) - c.radius;
      if ((g > 0) != (prev > 0)) ++crossings;
      prev = g;
    }
    const auto pts = circle_segment_intersections(c, s);
    CHECK(static_cast<int>(pts.size()) == crossings);
    for (const auto& p : pts) {
      CHECK(std::abs(distance(p, c.center) - c.radius) <= 1e-9);
      CHECK(point_segment_distance(p, s) <= 1e-9);
    }
    if (pts.size() == 2) CHECK(closest_parameter(pts[0], s) <= closest_parameter(pts[1], s));
    ++checked;
  }
  CHECK(checked > 90000);
}

TEST_CASE("point_segment_distance examples") {
  const Segment s{{-1, 0}, {1, 0}};
  CHECK(point_segment_distance({0, 1}, s) == doctest::Approx(1.0));
  CHECK(point_segment_distance({2, 0}, s) == doctest::Approx(1.0));
  CHECK(point_segment_distance({0, 0}, s) == 0.0);
}

TEST_CASE("transform examples") {
  const Frame world = Frame::world();
  CHECK(near(transform(Point2{1, 0}, world, Frame{{1, 0}, 0}), {0, 0}, 1e-15));
  // Rotation transpose by hand: [c s; -s c] (0,1) with c=0, s=1 gives (1, 0).
  CHECK(near(transform(Point2{0, 1}, world, Frame{{0, 0}, kPi / 2}), {1, 0}, 1e-15));
  const Pose p = transform(Pose{0, 0, kPi / 2}, world, Frame{{0, 0}, kPi / 2});
  CHECK(p.x == doctest::Approx(0.0));
  CHECK(p.y == doctest::Approx(0.0));
  CHECK(p.theta == doctest::Approx(0.0));
}

TEST_CASE("transform is an isometry and round-trips") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  std::uniform_real_distribution<double> ua(-kPi, kPi);
  for (int i = 0; i < 10000; ++i) {
    const Frame f{{u(rng), u(rng)}, ua(rng)};
    const Frame g{{u(rng), u(rng)}, ua(rng)};
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const Point2 ta = transform(a, f, g), tb = transform(b, f, g);
    CHECK(std::abs(distance(ta, tb) - distance(a, b)) <= 1e-12);
    CHECK(near(transform(ta, g, f), a, 1e-12));
    const Pose p{a.x, a.y, ua(rng)};
    const Pose back = transform(transform(p, f, g), g, f);
    CHECK(std::abs(back.x - p.x) <= 1e-12);
    CHECK(std::abs(normalize_angle(back.theta - p.theta)) <= 1e-12);
  }
}

TEST_CASE("disk_guard_polytope contains the disk within the face-count bound") {
  CHECK_THROWS_AS(disk_guard_polytope({{0, 0}, 1}, 3), InvalidArgument);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int faces : {4, 8, 16, 64}) {
    for (const Circle c : {Circle{{0, 0}, 1}, Circle{{5, 5}, 2}}) {
      const auto poly = disk_guard_polytope(c, faces);
      CHECK(poly.halfplanes.size() == static_cast<size_t>(faces));
      for (const auto& h : poly.halfplanes) CHECK(std::abs(norm(h.normal) - 1.0) <= 1e-9);
      for (int i = 0; i < 10000; ++i) {
        const double r = c.radius * std::sqrt(u(rng)), a = 2 * kPi * u(rng);
        CHECK(poly.contains(c.center + Point2{r * std::cos(a), r * std::sin(a)}, 1e-9));
      }
      // Vertices are the farthest points; they sit at r / cos(pi/k).
      const double bound = c.radius * (1.0 / std::cos(kPi / faces) - 1.0);
      for (int k = 0; k < faces; ++k) {
        const double a = 2 * kPi * (k + 0.5) / faces;
        const Point2 vertex = c.center + (c.radius / std::cos(kPi / faces)) * Point2{std::cos(a), std::sin(a)};
        CHECK(poly.contains(vertex, 1e-9));
        CHECK(distance(vertex, c.center) - c.radius <= bound + 1e-12);
        const Point2 beyond = c.center + (c.radius / std::cos(kPi / faces) + 1e-6) * Point2{std::cos(a), std::sin(a)};
        CHECK_FALSE(poly.contains(beyond));
      }
    }
  }
  CHECK(1.0 / std::cos(kPi / 64) - 1.0 == doctest::Approx(1.21e-3).epsilon(0.01));
  const auto sq = disk_guard_polytope({{0, 0}, 1}, 4);
  CHECK(sq.contains({1, 0}));
  CHECK(sq.contains({0, 1}));
}

TEST_CASE("box clipping against a polytope") {
  const auto sq = disk_guard_polytope({{0, 0}, 1}, 4);
  CHECK_FALSE(intersect_box({2, 3, 2, 3}, sq).has_value());
  auto b = intersect_box({0.5, 3, -0.25, 0.25}, sq);
  REQUIRE(b.has_value());
  CHECK(b->xhi == doctest::Approx(1.0));
  CHECK(b->xlo == doctest::Approx(0.5));
}

TEST_CASE("polygon helpers") {
  const Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(signed_area(sq) == doctest::Approx(4.0));
  CHECK(point_in_polygon({1, 1}, sq));
  CHECK_FALSE(point_in_polygon({3, 1}, sq));
  CHECK(segments_intersect({{0, 0}, {1, 1}}, {{0, 1}, {1, 0}}));
  CHECK_FALSE(segments_intersect({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}));
  auto hit = ray_segment_hit({0, 0}, {1, 0}, {{1, -1}, {1, 1}});
  REQUIRE(hit.has_value());
  CHECK(*hit == doctest::Approx(1.0));
}
