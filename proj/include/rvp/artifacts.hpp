#pragma once

#include <string>
#include <vector>

#include "rvp/geometry.hpp"
#include "rvp/hybrid_model.hpp"
#include "rvp/reachability.hpp"
#include "rvp/simulation.hpp"
#include "rvp/track.hpp"

namespace rvp {

/// World-frame drawing content.
struct Scene {
  std::vector<std::vector<Point2>> walls;    ///< closed rings
  std::vector<std::vector<Point2>> voronoi;  ///< open polylines
  std::vector<Point2> trajectory;
  std::vector<Point2> waypoints;
  std::vector<std::vector<Point2>> boxes;    ///< closed polygons
};

/// Walls of the track only.
Scene scene_from_track(const Track& t);
/// Circuit pieces as polylines.
void add_circuit(Scene& s, const std::vector<Segment>& circuit);
/// Rear-axle trajectory (with the final state) and waypoints of every step.
void add_log(Scene& s, const SimulationLog& log);
/// One rotated rectangle per slab.
void add_reach(Scene& s, const HybridAutomaton& aut, const ReachResult& r);

/// (x, y) extent of a slab carried to the world frame, counter-clockwise.
std::vector<Point2> slab_footprint(const HybridAutomaton& aut, const FlowpipeSlab& slab);

/// SVG 1.1 document, y pointing up, fitted to the content.
std::string render_svg(const Scene& s);

std::string scene_to_json(const Scene& s);
/// Throws InvalidArgument on malformed content.
Scene scene_from_json(const std::string& text);

/// mode,lap,t0,t1,x_lo,x_hi,y_lo,y_hi,theta_lo,theta_hi; one row per slab.
std::string slabs_to_csv(const ReachResult& r);

/// Throws IoError when the file cannot be written.
void write_text(const std::string& path, const std::string& content);
/// Throws IoError when the file cannot be read.
std::string read_text(const std::string& path);

}  // namespace rvp
