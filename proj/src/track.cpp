#include "rvp/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rvp/errors.hpp"
#include "rvp/numeric_format.hpp"
#include "rvp/voronoi.hpp"

namespace rvp {

namespace {

std::vector<Segment> ring_segments(const std::vector<Point2>& ring) {
  std::vector<Segment> out;
  for (size_t i = 0; i < ring.size(); ++i) out.push_back({ring[i], ring[(i + 1) % ring.size()]});
  return out;
}

bool ring_is_simple(const std::vector<Point2>& ring) {
  const auto segs = ring_segments(ring);
  const size_t n = segs.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(segs[i], segs[j])) return false;
    }
  return true;
}

void check_ring(const std::vector<Point2>& ring, const char* what) {
  if (ring.size() < 3) throw InvalidArgument(std::string("track: ") + what + " needs at least 3 vertices");
  for (const auto& p : ring)
    if (!is_finite(p)) throw InvalidArgument(std::string("track: ") + what + " has a non-finite vertex");
  for (size_t i = 0; i < ring.size(); ++i)
    if (distance(ring[i], ring[(i + 1) % ring.size()]) < kMinSegmentLength)
      throw InvalidArgument(std::string("track: ") + what + " has a degenerate edge");
  if (!ring_is_simple(ring)) throw InvalidArgument(std::string("track: ") + what + " is not simple");
}

std::vector<Point2> ccw(std::vector<Point2> ring) {
  if (signed_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());
  return ring;
}

}  // namespace

std::vector<Segment> Track::walls() const {
  auto w = ring_segments(outer);
  const auto i = ring_segments(inner);
  w.insert(w.end(), i.begin(), i.end());
  return w;
}

bool Track::in_channel(const Point2& p) const { return point_in_polygon(p, outer) && !point_in_polygon(p, inner); }

TrackKind parse_track_kind(const std::string& s) {
  if (s == "rectangle") return TrackKind::kRectangle;
  if (s == "l-shape") return TrackKind::kLShape;
  if (s == "triangle") return TrackKind::kTriangle;
  if (s == "polygon") return TrackKind::kPolygon;
  throw InvalidArgument("unknown track kind: " + s);
}

TrackParams default_params(TrackKind kind) {
  TrackParams p;
  p.kind = kind;
  if (kind == TrackKind::kLShape) {
    p.length = 12.0;
    p.height = 10.0;
  }
  return p;
}

std::vector<Point2> offset_polygon(const std::vector<Point2>& ring, double d) {
  check_ring(ring, "polygon");
  if (signed_area(ring) <= 0.0) throw InvalidArgument("offset: polygon must be counter-clockwise");
  if (!(d > 0.0)) throw InvalidArgument("offset: distance must be positive");
  const size_t n = ring.size();
  std::vector<Point2> out(n);
  for (size_t i = 0; i < n; ++i) {
    const Point2& prev = ring[(i + n - 1) % n];
    const Point2& cur = ring[i];
    const Point2& next = ring[(i + 1) % n];
    const Point2 u = (1.0 / distance(prev, cur)) * (cur - prev);
    const Point2 v = (1.0 / distance(cur, next)) * (next - cur);
    const Point2 nu = perp(u), nv = perp(v);
    const double denom = 1.0 + dot(nu, nv);
    if (denom < 1e-9) throw InvalidArgument("offset: reversing corner");
    out[i] = cur + (d / denom) * (nu + nv);
  }
  for (size_t i = 0; i < n; ++i) {
    const Point2 e0 = ring[(i + 1) % n] - ring[i];
    const Point2 e1 = out[(i + 1) % n] - out[i];
    if (dot(e0, e1) <= 0.0 || norm(e1) < kMinSegmentLength) throw InvalidArgument("offset: an edge collapses");
  }
  if (!ring_is_simple(out) || signed_area(out) <= 0.0) throw InvalidArgument("offset: result is not simple");
  return out;
}

Track generate_track(const TrackParams& p) {
  if (!(p.width > 0.0)) throw InvalidArgument("track: width must be positive");
  Track t;
  switch (p.kind) {
    case TrackKind::kRectangle:
      if (!(p.length > 0.0 && p.height > 0.0)) throw InvalidArgument("track: bad rectangle size");
      t.name = "rectangle";
      t.outer = {{0, 0}, {p.length, 0}, {p.length, p.height}, {0, p.height}};
      break;
    case TrackKind::kTriangle:
      if (!(p.side > 0.0)) throw InvalidArgument("track: bad triangle side");
      t.name = "triangle";
      t.outer = {{0, 0}, {p.side, 0}, {0.5 * p.side, 0.5 * std::sqrt(3.0) * p.side}};
      break;
    case TrackKind::kLShape:
      if (!(p.arm > 0.0 && p.arm < p.length && p.arm < p.height)) throw InvalidArgument("track: bad L-shape size");
      t.name = "l-shape";
      t.outer = {{0, 0}, {p.length, 0}, {p.length, p.arm}, {p.arm, p.arm}, {p.arm, p.height}, {0, p.height}};
      break;
    case TrackKind::kPolygon:
      t.name = "polygon";
      t.outer = ccw(p.polygon);
      break;
  }
  t.inner = offset_polygon(t.outer, p.width);
  const auto mid = offset_polygon(t.outer, 0.5 * p.width);
  const Point2 a = mid[0], b = mid[1];
  t.start = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y), std::atan2(b.y - a.y, b.x - a.x)};
  return t;
}

std::string track_to_json(const Track& t) {
  using nlohmann::json;
  auto ring = [](const std::vector<Point2>& r) {
    json a = json::array();
    for (const auto& p : r) a.push_back({round9(p.x), round9(p.y)});
    return a;
  };
  json j;
  j["name"] = t.name;
  j["outer"] = ring(t.outer);
  j["inner"] = ring(t.inner);
  j["start"] = {{"x", round9(t.start.x)}, {"y", round9(t.start.y)}, {"theta", round9(t.start.theta)}};
  return j.dump(1);
}

Track track_from_json(const std::string& text) {
  using nlohmann::json;
  Track t;
  try {
    const json j = json::parse(text);
    auto ring = [](const json& a) {
      std::vector<Point2> r;
      for (const auto& p : a) r.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      return r;
    };
    t.name = j.value("name", std::string("track"));
    t.outer = ring(j.at("outer"));
    t.inner = ring(j.at("inner"));
    const json& s = j.at("start");
    t.start = {s.at("x").get<double>(), s.at("y").get<double>(), s.at("theta").get<double>()};
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("track: malformed JSON: ") + e.what());
  }
  check_ring(t.outer, "outer wall");
  check_ring(t.inner, "inner wall");
  t.outer = ccw(t.outer);
  t.inner = ccw(t.inner);
  for (const auto& p : t.inner)
    if (!point_in_polygon(p, t.outer)) throw InvalidArgument("track: inner wall leaves the outer wall");
  if (!t.in_channel(t.start.position())) throw InvalidArgument("track: start pose is outside the channel");
  return t;
}

Track load_track(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return track_from_json(ss.str());
}

void save_track(const Track& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << track_to_json(t) << "\n";
  if (!out) throw IoError("cannot write " + path);
}

namespace {

struct GraphEdge {
  int u = 0, v = 0;
  std::vector<Point2> pts;
  bool alive = true;
};

double turn_at(const std::vector<Point2>& ring, size_t i) {
  const size_t n = ring.size();
  const Point2 a = ring[i] - ring[(i + n - 1) % n];
  const Point2 b = ring[(i + 1) % n] - ring[i];
  return std::abs(std::atan2(cross(a, b), dot(a, b)));
}

// Drops straight-through vertices, then absorbs the shortest piece into a
// neighbour until every piece reaches min_piece.
// Vertex 0 is never removed when keep_first is set.
void simplify_ring(std::vector<Point2>& ring, double min_piece, bool keep_first = false) {
  constexpr double kStraight = 1e-9;
  const size_t first = keep_first ? 1 : 0;
  for (bool changed = true; changed && ring.size() > 3;) {
    changed = false;
    for (size_t i = first; i < ring.size() && ring.size() > 3; ++i)
      if (turn_at(ring, i) < kStraight) {
        ring.erase(ring.begin() + static_cast<long>(i));
        changed = true;
        --i;
      }
    size_t shortest = 0;
    double len = INFINITY;
    for (size_t i = 0; i < ring.size(); ++i) {
      const double l = distance(ring[i], ring[(i + 1) % ring.size()]);
      if (l < len) len = l, shortest = i;
    }
    if (len < min_piece && ring.size() > 3) {
      const size_t j = (shortest + 1) % ring.size();
      size_t drop = turn_at(ring, shortest) < turn_at(ring, j) ? shortest : j;
      if (keep_first && drop == 0) drop = j;
      if (keep_first && drop == 0) drop = shortest;
      ring.erase(ring.begin() + static_cast<long>(drop));
      changed = true;
    }
  }
}

}  // namespace

std::vector<Segment> build_circuit(const Track& t, double deviation, double min_piece) {
  if (!(deviation > 0.0) || !(min_piece > 0.0)) throw InvalidArgument("circuit: tolerances must be positive");
  VoronoiOptions opt;
  opt.deviation = deviation;
  opt.region = [&t](const Point2& p) { return t.in_channel(p); };
  const VoronoiDiagram d = build_voronoi(t.walls(), opt);

  const double snap = std::max(1e-3, 2.0 * deviation);
  std::vector<Point2> nodes;
  auto node_of = [&](const Point2& p) {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (distance(nodes[i], p) <= snap) return static_cast<int>(i);
    nodes.push_back(p);
    return static_cast<int>(nodes.size() - 1);
  };
  std::vector<GraphEdge> edges;
  for (const auto& e : d.edges) {
    if (e.polyline.size() < 2) continue;
    GraphEdge g{node_of(e.polyline.front()), node_of(e.polyline.back()), e.polyline, true};
    if (g.u != g.v) edges.push_back(std::move(g));
  }

  std::vector<int> degree(nodes.size(), 0);
  for (const auto& e : edges) ++degree[static_cast<size_t>(e.u)], ++degree[static_cast<size_t>(e.v)];
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& e : edges) {
      if (!e.alive || (degree[static_cast<size_t>(e.u)] > 1 && degree[static_cast<size_t>(e.v)] > 1)) continue;
      e.alive = false;
      --degree[static_cast<size_t>(e.u)];
      --degree[static_cast<size_t>(e.v)];
      changed = true;
    }
  }
  std::vector<std::vector<size_t>> incident(nodes.size());
  size_t alive = 0;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].alive) {
      incident[static_cast<size_t>(edges[i].u)].push_back(i);
      incident[static_cast<size_t>(edges[i].v)].push_back(i);
      ++alive;
    }
  if (alive == 0) throw TopologyError("circuit: the channel has no closed medial cycle");
  for (const auto& inc : incident)
    if (!inc.empty() && inc.size() != 2) throw TopologyError("circuit: the medial axis branches into several cycles");

  // Walk the cycle from the first live edge.
  size_t first = 0;
  while (!edges[first].alive) ++first;
  std::vector<Point2> ring;
  size_t cur = first;
  int at = edges[first].u;
  for (size_t visited = 0;; ++visited) {
    const GraphEdge& e = edges[cur];
    std::vector<Point2> pts = e.pts;
    if (e.u != at) std::reverse(pts.begin(), pts.end());
    pts.front() = nodes[static_cast<size_t>(at)];
    ring.insert(ring.end(), pts.begin(), pts.end() - 1);
    at = e.u == at ? e.v : e.u;
    const auto& inc = incident[static_cast<size_t>(at)];
    cur = inc[0] == cur ? inc[1] : inc[0];
    if (cur == first) {
      if (visited + 1 != alive) throw TopologyError("circuit: the medial axis has several components");
      break;
    }
  }
  std::vector<Point2> clean;
  for (const auto& p : ring)
    if (clean.empty() || distance(clean.back(), p) > 1e-9) clean.push_back(p);
  if (clean.size() > 1 && distance(clean.front(), clean.back()) <= 1e-9) clean.pop_back();
  if (clean.size() < 3) throw TopologyError("circuit: degenerate medial cycle");
  simplify_ring(clean, min_piece);

  // Piece nearest the start pose fixes the driving direction and mode 0.
  auto nearest = [&](const std::vector<Point2>& r) {
    size_t best = 0;
    double bd = INFINITY;
    for (size_t i = 0; i < r.size(); ++i) {
      const double dd = point_segment_distance(t.start.position(), {r[i], r[(i + 1) % r.size()]});
      if (dd < bd) bd = dd, best = i;
    }
    return best;
  };
  size_t k = nearest(clean);
  if (dot(clean[(k + 1) % clean.size()] - clean[k], t.start.heading()) < 0.0) {
    std::reverse(clean.begin(), clean.end());
    k = nearest(clean);
  }
  const Segment host{clean[k], clean[(k + 1) % clean.size()]};
  const double len = host.length();
  double s = closest_parameter(t.start.position(), host);
  if (len <= 2.0 * min_piece) {
    s = 0.5;
  } else {
    s = std::clamp(s, min_piece / len, 1.0 - min_piece / len);
  }
  std::rotate(clean.begin(), clean.begin() + static_cast<long>((k + 1) % clean.size()), clean.end());
  // clean now starts at the host's end and finishes at its start.
  std::vector<Point2> loop{host.at(s)};
  loop.insert(loop.end(), clean.begin(), clean.end());
  std::vector<Segment> out;
  for (size_t i = 0; i < loop.size(); ++i) out.push_back({loop[i], loop[(i + 1) % loop.size()]});
  return out;
}

std::vector<Segment> verification_circuit(const std::vector<Segment>& circuit, double lookahead, double max_sin) {
  if (circuit.size() < 3) throw InvalidArgument("verification circuit: needs at least 3 pieces");
  if (!(lookahead > 0.0) || !(max_sin > 0.0 && max_sin < 1.0))
    throw InvalidArgument("verification circuit: bad lookahead or sine bound");
  std::vector<Point2> ring;
  for (const auto& s : circuit) ring.push_back(s.a);
  simplify_ring(ring, lookahead, true);
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<Point2> out{ring[0]};
    const size_t n = ring.size();
    for (size_t i = 1; i < n; ++i) {
      const Point2 a = ring[i] - ring[i - 1], b = ring[(i + 1) % n] - ring[i];
      if (std::abs(cross(a, b)) <= max_sin * norm(a) * norm(b)) {
        out.push_back(ring[i]);
        continue;
      }
      const double cut = std::min({lookahead, 0.45 * norm(a), 0.45 * norm(b)});
      out.push_back(ring[i] - (cut / norm(a)) * a);
      out.push_back(ring[i] + (cut / norm(b)) * b);
      changed = true;
    }
    if (out.size() > 64 * circuit.size()) throw InvalidArgument("verification circuit: kinks do not resolve");
    ring = std::move(out);
  }
  std::vector<Segment> out;
  for (size_t i = 0; i < ring.size(); ++i) out.push_back({ring[i], ring[(i + 1) % ring.size()]});
  return out;
}

double chain_length(const std::vector<Segment>& chain) {
  double s = 0.0;
  for (const auto& seg : chain) s += seg.length();
  return s;
}

}  // namespace rvp
