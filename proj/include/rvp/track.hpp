#pragma once

#include <string>
#include <vector>

#include "rvp/geometry.hpp"

namespace rvp {

/// Annular channel between two closed walls, both counter-clockwise.
struct Track {
  std::string name;
  std::vector<Point2> outer;
  std::vector<Point2> inner;
  Pose start;

  std::vector<Segment> walls() const;
  /// Inside the outer wall and outside the inner one.
  bool in_channel(const Point2& p) const;
};

enum class TrackKind { kRectangle, kLShape, kTriangle, kPolygon };

/// Parses "rectangle", "l-shape", "triangle" or "polygon".
TrackKind parse_track_kind(const std::string& s);

struct TrackParams {
  TrackKind kind = TrackKind::kRectangle;
  double width = 2.0;    ///< channel width
  double length = 10.0;  ///< rectangle outer size along x
  double height = 6.0;   ///< rectangle outer size along y
  double side = 12.0;    ///< triangle outer side
  double arm = 5.0;      ///< L-shape arm thickness of the outer wall
  std::vector<Point2> polygon;  ///< outer wall for kPolygon, counter-clockwise
};

/// Rectangle 10 x 6, triangle of side 12, L-shape 12 x 10 with arm 5; width 2.
TrackParams default_params(TrackKind kind);

/// Outer wall from the parameters, inner wall its inward offset by `width`.
/// Start pose at the middle of the first mid-line edge, heading along it.
/// Throws InvalidArgument for degenerate parameters.
Track generate_track(const TrackParams& params);

/// Inward offset of a counter-clockwise simple polygon by d with mitred
/// corners. Throws InvalidArgument when an edge collapses or flips.
std::vector<Point2> offset_polygon(const std::vector<Point2>& ccw, double d);

std::string track_to_json(const Track& t);
/// Throws InvalidArgument on malformed content.
Track track_from_json(const std::string& text);
/// Throws IoError when the file cannot be read or written.
Track load_track(const std::string& path);
void save_track(const Track& t, const std::string& path);

/// Medial cycle of the channel from the global diagram of all walls: spurs and
/// dangling branches are pruned, the remaining cycle is ordered in the
/// driving direction and starts at the projection of the start pose.
/// Collinear neighbours are merged and pieces shorter than `min_piece` are
/// absorbed. Throws TopologyError when no single cycle remains.
std::vector<Segment> build_circuit(const Track& t, double deviation, double min_piece = 0.05);

/// Coarsened circuit for the hybrid automaton: pieces shorter than the
/// lookahead are absorbed, and a kink of angle phi with |sin phi| > max_sin is
/// cut back by the lookahead on both sides (at most 45% of either piece), which
/// keeps the lateral offset after each switch below max_sin * lookahead.
/// Mode 0 keeps its start point.
std::vector<Segment> verification_circuit(const std::vector<Segment>& circuit, double lookahead,
                                          double max_sin = 0.9);

double chain_length(const std::vector<Segment>& chain);

}  // namespace rvp
