#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace rvp {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2& operator+=(const Point2& o) { x += o.x; y += o.y; return *this; }
  Point2& operator-=(const Point2& o) { x -= o.x; y -= o.y; return *this; }
  friend Point2 operator+(Point2 a, const Point2& b) { return a += b; }
  friend Point2 operator-(Point2 a, const Point2& b) { return a -= b; }
  friend Point2 operator-(const Point2& a) { return {-a.x, -a.y}; }
  friend Point2 operator*(double s, const Point2& p) { return {s * p.x, s * p.y}; }
  friend Point2 operator*(const Point2& p, double s) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Point2& a, const Point2& b) { return norm(a - b); }
inline Point2 perp(const Point2& a) { return {-a.y, a.x}; }
inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Normalizes an angle to (-pi, pi]. -pi maps to +pi.
double normalize_angle(double a);

struct Segment {
  Point2 a;
  Point2 b;

  double length() const { return distance(a, b); }
  Point2 direction() const { return b - a; }
  Point2 at(double t) const { return a + t * (b - a); }
};

inline constexpr double kMinSegmentLength = 1e-6;

/// Builds a segment, throwing InvalidArgument for non-finite or too-short input.
Segment make_segment(Point2 a, Point2 b, double min_length = kMinSegmentLength);

/// Planar pose of the rear axle: position plus heading.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Point2 position() const { return {x, y}; }
  Point2 heading() const { return {std::cos(theta), std::sin(theta)}; }
};

/// Rigid frame: local coordinates are rotated by `rotation` and offset by `origin`.
struct Frame {
  Point2 origin;
  double rotation = 0.0;

  static Frame world() { return {}; }
  /// Frame with origin at s.a and x-axis toward s.b.
  static Frame along(const Segment& s);

  Point2 to_world(const Point2& local) const;
  Point2 to_local(const Point2& world) const;
  Pose to_world(const Pose& local) const;
  Pose to_local(const Pose& world) const;
};

Point2 transform(const Point2& p, const Frame& from, const Frame& to);
Pose transform(const Pose& p, const Frame& from, const Frame& to);

struct Circle {
  Point2 center;
  double radius = 1.0;
};

/// Intersections of a circle with a segment, sorted by segment parameter.
std::vector<Point2> circle_segment_intersections(const Circle& c, const Segment& s);

/// Parameter t in [0,1] of the point of `s` closest to `p`.
double closest_parameter(const Point2& p, const Segment& s);
double point_segment_distance(const Point2& p, const Segment& s);

/// Distance along the ray origin + t*dir (|dir| = 1) to the segment, if hit.
std::optional<double> ray_segment_hit(const Point2& origin, const Point2& dir, const Segment& s);

/// True when the closed segments share at least one point.
bool segments_intersect(const Segment& s, const Segment& t);

/// Halfplane {p : normal . p <= offset}.
struct HalfPlane {
  Point2 normal;
  double offset = 0.0;

  double signed_distance(const Point2& p) const { return dot(normal, p) - offset; }
};

struct ConvexPolytope2 {
  std::vector<HalfPlane> halfplanes;

  bool contains(const Point2& p, double tol = 0.0) const;
};

/// Circumscribing regular polygon of a disk, one tangent face per normal direction.
ConvexPolytope2 disk_guard_polytope(const Circle& c, int faces = 16);

/// Axis-aligned rectangle.
struct Box2 {
  double xlo = 0.0, xhi = 0.0, ylo = 0.0, yhi = 0.0;

  bool empty() const { return xlo > xhi || ylo > yhi; }
  std::array<Point2, 4> corners() const {
    return {Point2{xlo, ylo}, Point2{xhi, ylo}, Point2{xhi, yhi}, Point2{xlo, yhi}};
  }
};

using Polygon = std::vector<Point2>;

/// Sutherland-Hodgman clip of a convex polygon against one halfplane.
Polygon clip_polygon(const Polygon& poly, const HalfPlane& h);
Polygon clip_polygon(const Polygon& poly, const ConvexPolytope2& p);
std::optional<Box2> bounding_box(const Polygon& poly);

/// Bounding box of box ∩ polytope, or nullopt when they are disjoint.
std::optional<Box2> intersect_box(const Box2& b, const ConvexPolytope2& p);

/// Even-odd point in polygon test; polygon given as a closed vertex ring.
bool point_in_polygon(const Point2& p, const Polygon& ring);
double signed_area(const Polygon& ring);

}  // namespace rvp
