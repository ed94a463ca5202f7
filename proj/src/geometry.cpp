#include "rvp/geometry.hpp"

#include <algorithm>
#include <limits>

#include "rvp/errors.hpp"

namespace rvp {

double normalize_angle(double a) {
  if (!std::isfinite(a)) throw InvalidArgument("normalize_angle: non-finite angle");
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Segment make_segment(Point2 a, Point2 b, double min_length) {
  if (!is_finite(a) || !is_finite(b)) throw InvalidArgument("segment: non-finite endpoint");
  if (distance(a, b) < min_length) throw InvalidArgument("segment: shorter than minimum length");
  return {a, b};
}

Frame Frame::along(const Segment& s) {
  Point2 d = s.direction();
  return {s.a, normalize_angle(std::atan2(d.y, d.x))};
}

Point2 Frame::to_world(const Point2& p) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  return {origin.x + c * p.x - s * p.y, origin.y + s * p.x + c * p.y};
}

Point2 Frame::to_local(const Point2& p) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  const Point2 d = p - origin;
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Pose Frame::to_world(const Pose& p) const {
  Point2 w = to_world(p.position());
  return {w.x, w.y, normalize_angle(p.theta + rotation)};
}

Pose Frame::to_local(const Pose& p) const {
  Point2 l = to_local(p.position());
  return {l.x, l.y, normalize_angle(p.theta - rotation)};
}

Point2 transform(const Point2& p, const Frame& from, const Frame& to) {
  return to.to_local(from.to_world(p));
}

Pose transform(const Pose& p, const Frame& from, const Frame& to) {
  return to.to_local(from.to_world(p));
}

std::vector<Point2> circle_segment_intersections(const Circle& c, const Segment& s) {
  const Point2 d = s.direction();
  const double dd = dot(d, d);
  if (dd == 0.0) return {};
  // Work relative to the foot of the perpendicular from the center.
  const Point2 f = s.a - c.center;
  const double t0 = -dot(f, d) / dd;
  const Point2 foot = f + t0 * d;
  double disc = c.radius * c.radius - dot(foot, foot);
  if (std::abs(disc) < 1e-12 * std::max(1.0, c.radius * c.radius)) disc = std::max(disc, 0.0);
  if (disc < 0.0) return {};

  const double half = std::sqrt(disc / dd);
  constexpr double kTol = 1e-9;
  std::vector<double> ts;
  for (double t : {t0 - half, t0 + half}) {
    if (t < -kTol || t > 1.0 + kTol) continue;
    t = std::clamp(t, 0.0, 1.0);
    if (!ts.empty() && std::abs(ts.back() - t) * std::sqrt(dd) < 1e-12) continue;
    ts.push_back(t);
  }
  std::vector<Point2> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back(s.at(t));
  return out;
}

double closest_parameter(const Point2& p, const Segment& s) {
  const Point2 d = s.direction();
  const double dd = dot(d, d);
  if (dd == 0.0) return 0.0;
  return std::clamp(dot(p - s.a, d) / dd, 0.0, 1.0);
}

double point_segment_distance(const Point2& p, const Segment& s) {
  return distance(p, s.at(closest_parameter(p, s)));
}

std::optional<double> ray_segment_hit(const Point2& origin, const Point2& dir, const Segment& s) {
  const Point2 e = s.direction();
  const double denom = cross(dir, e);
  const Point2 w = s.a - origin;
  if (std::abs(denom) < 1e-15) {
    // Parallel: a collinear segment is hit at its nearest endpoint ahead.
    if (std::abs(cross(w, dir)) > 1e-12) return std::nullopt;
    const double ta = dot(s.a - origin, dir), tb = dot(s.b - origin, dir);
    if (ta < 0.0 && tb < 0.0) return std::nullopt;
    if (ta < 0.0 || tb < 0.0) return 0.0;
    return std::min(ta, tb);
  }
  const double t = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (t < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  return t;
}

bool segments_intersect(const Segment& s, const Segment& t) {
  auto orient = [](const Point2& a, const Point2& b, const Point2& c) {
    double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
  };
  auto on_seg = [](const Point2& a, const Point2& b, const Point2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
  };
  const int o1 = orient(s.a, s.b, t.a), o2 = orient(s.a, s.b, t.b);
  const int o3 = orient(t.a, t.b, s.a), o4 = orient(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_seg(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_seg(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_seg(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_seg(t.a, t.b, s.b)) return true;
  return false;
}

bool ConvexPolytope2::contains(const Point2& p, double tol) const {
  return std::all_of(halfplanes.begin(), halfplanes.end(),
                     [&](const HalfPlane& h) { return h.signed_distance(p) <= tol; });
}

ConvexPolytope2 disk_guard_polytope(const Circle& c, int faces) {
  if (faces < 4) throw InvalidArgument("disk_guard_polytope: need at least 4 faces");
  if (!(c.radius > 0.0)) throw InvalidArgument("disk_guard_polytope: radius must be positive");
  ConvexPolytope2 poly;
  poly.halfplanes.reserve(static_cast<size_t>(faces));
  for (int k = 0; k < faces; ++k) {
    const double a = 2.0 * kPi * k / faces;
    const Point2 n{std::cos(a), std::sin(a)};
    poly.halfplanes.push_back({n, dot(n, c.center) + c.radius});
  }
  return poly;
}

Polygon clip_polygon(const Polygon& poly, const HalfPlane& h) {
  Polygon out;
  const size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (size_t i = 0; i < n; ++i) {
    const Point2& cur = poly[i];
    const Point2& nxt = poly[(i + 1) % n];
    const double dc = h.signed_distance(cur), dn = h.signed_distance(nxt);
    if (dc <= 0.0) out.push_back(cur);
    if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

Polygon clip_polygon(const Polygon& poly, const ConvexPolytope2& p) {
  Polygon out = poly;
  for (const auto& h : p.halfplanes) {
    out = clip_polygon(out, h);
    if (out.empty()) break;
  }
  return out;
}

std::optional<Box2> bounding_box(const Polygon& poly) {
  if (poly.empty()) return std::nullopt;
  Box2 b{poly[0].x, poly[0].x, poly[0].y, poly[0].y};
  for (const auto& p : poly) {
    b.xlo = std::min(b.xlo, p.x);
    b.xhi = std::max(b.xhi, p.x);
    b.ylo = std::min(b.ylo, p.y);
    b.yhi = std::max(b.yhi, p.y);
  }
  return b;
}

std::optional<Box2> intersect_box(const Box2& b, const ConvexPolytope2& p) {
  if (b.empty()) return std::nullopt;
  const auto c = b.corners();
  Polygon poly(c.begin(), c.end());
  return bounding_box(clip_polygon(poly, p));
}

bool point_in_polygon(const Point2& p, const Polygon& ring) {
  bool inside = false;
  const size_t n = ring.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = ring[i];
    const Point2& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double signed_area(const Polygon& ring) {
  double a = 0.0;
  for (size_t i = 0, n = ring.size(); i < n; ++i) a += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * a;
}

}  // namespace rvp
