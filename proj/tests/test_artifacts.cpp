#include <cstdio>
#include <string>

#include "doctest.h"
#include "rvp/artifacts.hpp"
#include "rvp/errors.hpp"

using namespace rvp;

namespace {

size_t count(const std::string& s, const std::string& what) {
  size_t n = 0;
  for (size_t p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

size_t count_lines(const std::string& s) { return count(s, "\n"); }

HybridAutomaton square_automaton() {
  const std::vector<Segment> sq{{{0, 0}, {4, 0}}, {{4, 0}, {4, 4}}, {{4, 4}, {0, 4}}, {{0, 4}, {0, 0}}};
  return build_automaton(sq, {1.0, 1.0});
}

}  // namespace

TEST_CASE("empty log draws the walls only") {
  const Track t = generate_track(default_params(TrackKind::kRectangle));
  Scene s = scene_from_track(t);
  add_log(s, SimulationLog{});
  const std::string svg = render_svg(s);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(count(svg, "version=\"1.1\"") == 1);
  CHECK(count(svg, "class=\"wall\"") == 2);
  CHECK(count(svg, "class=\"trajectory\"") == 0);
  CHECK(count(svg, "class=\"waypoint\"") == 0);
  CHECK(count(svg, "class=\"slab\"") == 0);
  CHECK(count(svg, "</svg>") == 1);
}

TEST_CASE("three slabs draw three rotated rectangles") {
  const HybridAutomaton aut = square_automaton();
  ReachResult r;
  r.slabs.push_back({0, 0, 0.0, 0.1, {{1.0, 1.5}, {-0.1, 0.1}, {0.0, 0.1}}});
  r.slabs.push_back({1, 0, 0.1, 0.2, {{1.0, 1.5}, {-0.1, 0.1}, {0.0, 0.1}}});
  r.slabs.push_back({2, 0, 0.2, 0.3, {{0.0, 2.0}, {0.0, 0.2}, {0.0, 0.1}}});
  Scene s;
  add_reach(s, aut, r);
  REQUIRE(s.boxes.size() == 3);
  // Mode 1 runs up the right side: local x is world y, local y is world -x.
  const auto fp = slab_footprint(aut, r.slabs[1]);
  REQUIRE(fp.size() == 4);
  CHECK(fp[0].x == doctest::Approx(4.1));
  CHECK(fp[0].y == doctest::Approx(1.0));
  CHECK(fp[2].x == doctest::Approx(3.9));
  CHECK(fp[2].y == doctest::Approx(1.5));
  // Mode 2 runs leftwards along the top.
  const auto top = slab_footprint(aut, r.slabs[2]);
  CHECK(top[1].x == doctest::Approx(2.0));
  CHECK(top[1].y == doctest::Approx(4.0));
  CHECK(count(render_svg(s), "class=\"slab\"") == 3);

  const std::string csv = slabs_to_csv(r);
  CHECK(count_lines(csv) == 4);
  CHECK(csv.rfind("mode,lap,t0,t1,x_lo,x_hi,y_lo,y_hi,theta_lo,theta_hi\n", 0) == 0);
  CHECK(count(csv, "\n1,0,0.1,0.2,1,1.5,-0.1,0.1,0,0.1\n") == 1);
}

TEST_CASE("log scene and CSV rows") {
  SimulationLog log;
  for (int k = 0; k < 5; ++k) {
    StepRecord r;
    r.time = 0.025 * k;
    r.state = {0.025 * k, 1.0, 0.0};
    r.waypoint = {0.025 * k + 1.0, 1.0};
    log.steps.push_back(r);
  }
  log.final_state = {0.125, 1.0, 0.0};
  Scene s;
  add_log(s, log);
  CHECK(s.trajectory.size() == 6);
  CHECK(s.waypoints.size() == 5);
  CHECK(count(render_svg(s), "class=\"waypoint\"") == 5);
  CHECK(count_lines(log_to_csv(log)) == 6);
}

TEST_CASE("rendering is deterministic and scenes round trip") {
  const Track t = generate_track(default_params(TrackKind::kTriangle));
  Scene s = scene_from_track(t);
  add_circuit(s, build_circuit(t, 0.01));
  const Scene u = scene_from_json(scene_to_json(s));
  CHECK(render_svg(scene_from_json(scene_to_json(u))) == render_svg(u));
  CHECK(render_svg(s) == render_svg(s));
  CHECK(scene_to_json(u) == scene_to_json(s));
  CHECK_THROWS_AS(scene_from_json("{\"walls\": [[1]]}"), InvalidArgument);
  CHECK_THROWS_AS(scene_from_json("nope"), InvalidArgument);
}

TEST_CASE("unwritable destination is an I/O error") {
  CHECK_THROWS_AS(write_text("/nonexistent/dir/out.svg", "x"), IoError);
  CHECK_THROWS_AS(read_text("/nonexistent/dir/in.json"), IoError);
  const std::string path = "test_artifacts_out.txt";
  write_text(path, "a,b\n1,2\n");
  CHECK(read_text(path) == "a,b\n1,2\n");
  std::remove(path.c_str());
}
