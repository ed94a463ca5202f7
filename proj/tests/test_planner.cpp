#include <cmath>

#include "doctest.h"
#include "rvp/errors.hpp"
#include "rvp/planner.hpp"

using namespace rvp;

namespace {

VoronoiDiagram polyline_diagram(std::vector<std::vector<Point2>> lines) {
  VoronoiDiagram d;
  for (auto& l : lines) {
    VoronoiEdge e;
    e.polyline = std::move(l);
    d.edges.push_back(std::move(e));
  }
  return d;
}

}  // namespace

TEST_CASE("select_waypoint examples") {
  const auto axis = polyline_diagram({{{-5, 0}, {5, 0}}});
  const auto ahead = select_waypoint(axis, {0, 0, 0}, 1.0);
  CHECK(distance(ahead.position, {1, 0}) < 1e-12);
  CHECK(ahead.rear_frame.x == doctest::Approx(1.0));

  // Facing backward, (-1,0) is ahead in the rear-axle frame.
  const auto back = select_waypoint(axis, {0, 0, kPi}, 1.0);
  CHECK(distance(back.position, {-1, 0}) < 1e-12);
  CHECK(back.rear_frame.x == doctest::Approx(1.0));
  CHECK(std::abs(back.rear_frame.y) < 1e-12);

  // Two candidates at rear-frame (0.8,0.6) and (0.6,-0.8).
  const auto two = polyline_diagram({{{0.8, 0.0}, {0.8, 1.0}}, {{0.6, -1.0}, {0.6, 0.0}}});
  const auto pick = select_waypoint(two, {0, 0, 0}, 1.0);
  CHECK(distance(pick.position, {0.8, 0.6}) < 1e-12);
  CHECK(pick.edge_id == 0);
}

TEST_CASE("select_waypoint tie-breaks and failures") {
  // Symmetric candidates (0.6, +-0.8): equal g_x and |g_y|, lower edge id wins.
  const auto sym = polyline_diagram({{{0.6, -1.0}, {0.6, -0.5}}, {{0.6, 0.5}, {0.6, 1.0}}});
  CHECK(select_waypoint(sym, {0, 0, 0}, 1.0).edge_id == 0);
  // A polyline vertex on the circle is counted once.
  const auto kinked = polyline_diagram({{{0, 0}, {1, 0}, {2, 1}}});
  const auto w = select_waypoint(kinked, {0, 0, 0}, 1.0);
  CHECK(distance(w.position, {1, 0}) < 1e-12);
  CHECK_THROWS_AS(select_waypoint(polyline_diagram({{{-3, 0}, {-2, 0}}}), {0, 0, 0}, 1.0), NoWaypoint);
  CHECK_THROWS_AS(select_waypoint(polyline_diagram({}), {0, 0, 0}, 1.0), NoWaypoint);
  CHECK_THROWS_AS(select_waypoint(polyline_diagram({}), {0, 0, 0}, 0.0), InvalidArgument);
  // The waypoint lies on the lookahead circle.
  const auto diag = polyline_diagram({{{-2, -1}, {3, 2}}});
  const auto on = select_waypoint(diag, {0.2, 0.1, 0.4}, 1.5);
  CHECK(distance(on.position, {0.2, 0.1}) == doctest::Approx(1.5));
}

TEST_CASE("measure_widths on a corridor") {
  const std::vector<Segment> walls{{{0, 0}, {10, 0}}, {{0, 2}, {10, 2}}};
  const auto w = measure_widths({{{1, 1}, {9, 1}}}, walls);
  CHECK(w.min_width == doctest::Approx(2.0));
  CHECK(w.max_width == doctest::Approx(2.0));
  CHECK_THROWS_AS(measure_widths({}, walls), InvalidArgument);
}

TEST_CASE("check_consistency_conditions examples") {
  const auto r = check_consistency_conditions({1.5, 3.0}, 10.0, 0.325, 1.0, 1.0);
  CHECK(r.range_covers_width);
  CHECK(r.range_covers_lookahead);
  CHECK(r.range_lookahead_margin == doctest::Approx(10.0 - 2.825));
  CHECK_FALSE(r.clearance_ok);
  // (L + ell)^2 - m^2/4 = 1.755625 - 0.5625 = 1.193125
  CHECK(r.clearance_margin == doctest::Approx(1.0 - 1.193125));
  CHECK_FALSE(r.all());

  // Square corridor m = M, D = M/2, huge range: D^2 = m^2/4 >= (L+ell)^2 - m^2/4 iff m^2/2 >= (L+ell)^2.
  const double m = 2.0;
  const auto ok = check_consistency_conditions({m, m}, 1e6, 0.325, 1.0, m / 2);
  CHECK(ok.all());
  CHECK(ok.clearance_margin == doctest::Approx(m * m / 2 - 1.325 * 1.325));

  const auto wide = check_consistency_conditions({1.0, 12.0}, 10.0, 0.325, 1.0, 5.0);
  CHECK_FALSE(wide.range_covers_width);
  CHECK_FALSE(wide.all());
}
