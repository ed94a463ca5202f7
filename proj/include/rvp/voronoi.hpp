#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rvp/geometry.hpp"

namespace rvp {

enum class EdgeKind { kLinear, kParabolic };
enum class DiagramScope { kLocal, kGlobal };

struct VoronoiEdge {
  std::vector<Point2> polyline;
  std::pair<int, int> site_pair;  ///< indices into VoronoiDiagram::sites
  EdgeKind kind = EdgeKind::kLinear;
};

struct VoronoiDiagram {
  std::vector<VoronoiEdge> edges;
  std::vector<Segment> sites;
  DiagramScope scope = DiagramScope::kGlobal;
};

struct VoronoiOptions {
  double deviation = 0.01;       ///< parabola approximation bound, meters
  double sample_step = 0.01;     ///< bisector sampling pitch, meters
  /// Edges reaching closer than this to a wall are corner spurs and dropped.
  double prune_clearance = 1e-3;
  /// Points outside this region are removed after pruning.
  std::function<bool(const Point2&)> region;
  /// Only the diagram inside this disk is required; sites that cannot shape it are skipped.
  std::optional<Circle> focus;
  DiagramScope scope = DiagramScope::kGlobal;
};

/// Segment Voronoi diagram by pairwise bisectors clipped by dominance.
/// Sites are split into endpoints and open interiors, so every bisector is
/// a line (point/point, line/line) or a parabola (point/line).
VoronoiDiagram build_voronoi(const std::vector<Segment>& sites, double deviation);
VoronoiDiagram build_voronoi(const std::vector<Segment>& sites, const VoronoiOptions& options);

/// Polyline within `deviation` of the parabola equidistant from `focus` and the
/// line through `directrix`. The span is given as abscissae along the directrix
/// direction, measured from the foot of the perpendicular through the focus.
std::vector<Point2> linearize_parabola(const Point2& focus, const Segment& directrix, double u_begin,
                                       double u_end, double deviation);

/// Distance from p to the nearest site.
double clearance(const std::vector<Segment>& sites, const Point2& p);

/// JSON export with `scope`, `sites` and `edges`; coordinates rounded to 9 significant digits.
std::string export_diagram(const VoronoiDiagram& d);

}  // namespace rvp
