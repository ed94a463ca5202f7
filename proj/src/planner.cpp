#include "rvp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rvp/errors.hpp"

namespace rvp {

VoronoiDiagram local_diagram(const LidarScan& scan, const LinearizedScan& lin, double lookahead, double deviation) {
  if (lin.segments.size() < 2) throw NoWaypoint("local diagram: fewer than two visible wall pieces");
  VoronoiOptions opt;
  opt.deviation = deviation;
  opt.scope = DiagramScope::kLocal;
  // Fitted corners are bevelled, so corner spurs stop short of the walls.
  opt.prune_clearance = 0.1;
  opt.focus = Circle{scan.pose_at_capture.position(), 1.05 * lookahead};
  opt.region = [&scan](const Point2& p) { return in_visible_region(scan, p); };
  return build_voronoi(lin.segments, opt);
}

Waypoint select_waypoint(const VoronoiDiagram& diagram, const Pose& pose, double lookahead) {
  if (!(lookahead > 0.0)) throw InvalidArgument("select_waypoint: lookahead must be positive");
  const Frame rear{pose.position(), pose.theta};
  const Circle circle{pose.position(), lookahead};

  bool found = false;
  Waypoint best;
  for (size_t e = 0; e < diagram.edges.size(); ++e) {
    const auto& poly = diagram.edges[e].polyline;
    for (size_t k = 0; k + 1 < poly.size(); ++k) {
      const Segment piece{poly[k], poly[k + 1]};
      if (piece.length() < 1e-12) continue;
      for (const Point2& p : circle_segment_intersections(circle, piece)) {
        const Point2 g = rear.to_local(p);
        if (!(g.x > 1e-12)) continue;
        bool better = !found;
        if (found) {
          if (g.x > best.rear_frame.x + 1e-12) {
            better = true;
          } else if (g.x >= best.rear_frame.x - 1e-12) {
            // A shared polyline vertex shows up twice; keep the first.
            if (distance(p, best.position) <= 1e-9) continue;
            const double ay = std::abs(g.y), by = std::abs(best.rear_frame.y);
            better = ay < by - 1e-12 || (std::abs(ay - by) <= 1e-12 && static_cast<int>(e) < best.edge_id);
          }
        }
        if (better) {
          found = true;
          best.position = p;
          best.rear_frame = g;
          best.edge_id = static_cast<int>(e);
          best.frame = Frame::along(piece);
        }
      }
    }
  }
  if (!found) throw NoWaypoint("select_waypoint: lookahead circle does not meet the diagram ahead");
  return best;
}

TrackWidths measure_widths(const std::vector<std::vector<Point2>>& axis, const std::vector<Segment>& walls,
                           double step) {
  if (!(step > 0.0)) throw InvalidArgument("measure_widths: step must be positive");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& poly : axis) {
    for (size_t k = 0; k + 1 < poly.size(); ++k) {
      const double len = distance(poly[k], poly[k + 1]);
      const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
      for (int i = 0; i <= n; ++i) {
        const double c = clearance(walls, poly[k] + (static_cast<double>(i) / n) * (poly[k + 1] - poly[k]));
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
  }
  if (hi == 0.0) throw InvalidArgument("measure_widths: empty axis");
  return {2.0 * lo, 2.0 * hi};
}

ConsistencyReport check_consistency_conditions(const TrackWidths& widths, double range, double wheelbase,
                                               double lookahead, double min_distance) {
  ConsistencyReport r;
  r.range = range;
  r.max_width = widths.max_width;
  r.min_width = widths.min_width;
  r.wheelbase = wheelbase;
  r.lookahead = lookahead;
  r.min_distance = min_distance;
  r.range_width_margin = range - widths.max_width;
  r.range_lookahead_margin = range - (wheelbase + lookahead + 0.5 * widths.max_width);
  const double reach = wheelbase + lookahead;
  r.clearance_margin = min_distance * min_distance - (reach * reach - 0.25 * widths.min_width * widths.min_width);
  r.range_covers_width = r.range_width_margin > 0.0;
  r.range_covers_lookahead = r.range_lookahead_margin > 0.0;
  r.clearance_ok = r.clearance_margin >= 0.0;
  return r;
}

}  // namespace rvp
