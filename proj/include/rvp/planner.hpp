#pragma once

#include <vector>

#include "rvp/geometry.hpp"
#include "rvp/perception.hpp"
#include "rvp/voronoi.hpp"

namespace rvp {

struct Waypoint {
  Point2 position;        ///< world frame
  Point2 rear_frame;      ///< (g_x, g_y) in the rear-axle frame
  int edge_id = -1;
  Frame frame;            ///< frame of the hosting edge piece
};

/// Among the lookahead-circle/diagram intersections ahead of the rear axle,
/// picks the one furthest along the heading; ties go to smaller |g_y|, then
/// lower edge id. Throws NoWaypoint when there is no forward intersection.
Waypoint select_waypoint(const VoronoiDiagram& diagram, const Pose& pose, double lookahead);

/// Diagram of the linearized visible walls, restricted to the visible region
/// and to a disk slightly larger than the lookahead circle around the rear axle.
/// Edges reaching within 0.1 m of a fitted wall piece are dropped as corner spurs.
VoronoiDiagram local_diagram(const LidarScan& scan, const LinearizedScan& lin, double lookahead, double deviation);

struct TrackWidths {
  double min_width = 0.0;  ///< m
  double max_width = 0.0;  ///< M
};

/// Twice the min/max wall clearance sampled along the given medial-axis
/// polylines at `step` spacing.
TrackWidths measure_widths(const std::vector<std::vector<Point2>>& axis, const std::vector<Segment>& walls,
                           double step = 0.01);

struct ConsistencyReport {
  double range = 0.0;         ///< R
  double max_width = 0.0;     ///< M
  double min_width = 0.0;     ///< m
  double wheelbase = 0.0;     ///< L, lidar to rear axle
  double lookahead = 0.0;     ///< ell
  double min_distance = 0.0;  ///< D, lidar to walls
  bool range_covers_width = false;     ///< R > M
  bool range_covers_lookahead = false; ///< R > L + ell + M/2
  bool clearance_ok = false;           ///< D^2 >= (L + ell)^2 - m^2/4
  double range_width_margin = 0.0;     ///< meters
  double range_lookahead_margin = 0.0; ///< meters
  double clearance_margin = 0.0;       ///< square meters

  bool all() const { return range_covers_width && range_covers_lookahead && clearance_ok; }
};

/// Sufficient conditions for the local and global diagrams to agree inside
/// the lookahead circle.
ConsistencyReport check_consistency_conditions(const TrackWidths& widths, double range, double wheelbase,
                                               double lookahead, double min_distance);

}  // namespace rvp
