#include "rvp/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "json.hpp"
#include "rvp/errors.hpp"
#include "rvp/numeric_format.hpp"

namespace rvp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Endpoint or open interior of an input segment.
struct SubSite {
  bool is_point = false;
  Point2 p;             // point sub-site location
  int segment = -1;     // owning segment (first owner for shared endpoints)
  std::vector<int> owners;
  // Interior line data: unit direction, unit normal, offset (n . x = c).
  Point2 t, n;
  double c = 0.0;
};

double subsite_distance(const SubSite& s, const std::vector<Segment>& sites, const Point2& p) {
  if (s.is_point) return distance(p, s.p);
  const Segment& seg = sites[static_cast<size_t>(s.segment)];
  const Point2 d = seg.direction();
  const double u = dot(p - seg.a, d) / dot(d, d);
  if (u <= 1e-12 || u >= 1.0 - 1e-12) return kInf;
  return std::abs(dot(s.n, p) - s.c);
}

// A bisector curve: either a line base + s*dir or a parabola in directrix
// coordinates foot + u*t + w(u)*n with w = (u^2 + f^2) / (2f).
struct Curve {
  bool parabola = false;
  Point2 base, dir;           // line
  Point2 foot, t, n;          // parabola
  double f = 0.0;
  double lo = 0.0, hi = 0.0;  // parameter range

  Point2 at(double s) const {
    if (!parabola) return base + s * dir;
    return foot + s * t + ((s * s + f * f) / (2.0 * f)) * n;
  }
  // Parameter increment giving roughly `step` of arc length near s.
  double increment(double s, double step) const {
    if (!parabola) return step;
    return step / std::sqrt(1.0 + (s / f) * (s / f));
  }
};

// Clips the line base + s*dir to a disk, returning false when they miss.
bool clip_line_to_disk(const Point2& base, const Point2& dir, const Circle& c, double& lo, double& hi) {
  const Point2 f = base - c.center;
  const double b = dot(f, dir);
  const double disc = b * b - (dot(f, f) - c.radius * c.radius);
  if (disc <= 0.0) return false;
  const double r = std::sqrt(disc);
  lo = std::max(lo, -b - r);
  hi = std::min(hi, -b + r);
  return lo < hi;
}

bool clip_line_to_box(const Point2& base, const Point2& dir, const Box2& box, double& lo, double& hi) {
  const double o[2] = {base.x, base.y};
  const double d[2] = {dir.x, dir.y};
  const double mn[2] = {box.xlo, box.ylo};
  const double mx[2] = {box.xhi, box.yhi};
  for (int k = 0; k < 2; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < mn[k] || o[k] > mx[k]) return false;
      continue;
    }
    double a = (mn[k] - o[k]) / d[k], b = (mx[k] - o[k]) / d[k];
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  }
  return lo < hi;
}

bool inside(const Box2& b, const Point2& p) {
  return p.x >= b.xlo && p.x <= b.xhi && p.y >= b.ylo && p.y <= b.yhi;
}

struct Builder {
  const std::vector<Segment>& sites;
  const VoronoiOptions& opt;
  std::vector<SubSite> subs;
  std::vector<int> active_segments;
  Box2 bounds;
  // Focus disk grown so that corner spurs are traced to the wall before pruning.
  std::optional<Circle> reach;

  double dmin(const Point2& p) const {
    double best = kInf;
    for (int k : active_segments) best = std::min(best, point_segment_distance(p, sites[static_cast<size_t>(k)]));
    return best;
  }

  bool in_scope(const Point2& p) const {
    if (!inside(bounds, p)) return false;
    if (opt.focus && distance(p, opt.focus->center) > opt.focus->radius) return false;
    return true;
  }

  // Point lies on the bisector of a and b and no site is strictly closer.
  bool dominant(const SubSite& a, const SubSite& b, const Point2& p) const {
    if (!inside(bounds, p)) return false;
    if (reach && distance(p, reach->center) > reach->radius) return false;
    const double da = subsite_distance(a, sites, p);
    const double db = subsite_distance(b, sites, p);
    if (!std::isfinite(da) || !std::isfinite(db)) return false;
    const double tol = 1e-9 * std::max(1.0, da);
    if (std::abs(da - db) > 1e-7 * std::max(1.0, da)) return false;
    for (int k : active_segments) {
      if (point_segment_distance(p, sites[static_cast<size_t>(k)]) < da - tol) return false;
    }
    return true;
  }

  template <class Pred>
  static double refine(const Curve& c, double valid_s, double invalid_s, Pred&& ok) {
    for (int it = 0; it < 60 && std::abs(valid_s - invalid_s) > 1e-11; ++it) {
      const double mid = 0.5 * (valid_s + invalid_s);
      (ok(c.at(mid)) ? valid_s : invalid_s) = mid;
    }
    return valid_s;
  }

  // Maximal parameter runs where `ok` holds.
  template <class Pred>
  std::vector<std::pair<double, double>> runs(const Curve& c, Pred&& ok, double step) const {
    std::vector<std::pair<double, double>> out;
    double prev_s = c.lo;
    bool prev_ok = ok(c.at(c.lo));
    double start = c.lo;
    double s = c.lo;
    while (s < c.hi) {
      s = std::min(c.hi, s + c.increment(s, step));
      const bool now = ok(c.at(s));
      if (now && !prev_ok) start = refine(c, s, prev_s, ok);
      if (!now && prev_ok) out.emplace_back(start, refine(c, prev_s, s, ok));
      prev_ok = now;
      prev_s = s;
    }
    if (prev_ok) out.emplace_back(start, c.hi);
    return out;
  }

  std::vector<Curve> bisectors(const SubSite& a, const SubSite& b) const {
    std::vector<Curve> out;
    auto line_curve = [&](Point2 m, double k) {
      const double mm = norm(m);
      if (mm < 1e-12) return;
      Curve c;
      c.base = (k / (mm * mm)) * m;
      c.dir = (1.0 / mm) * perp(m);
      c.lo = -kInf;
      c.hi = kInf;
      if (!clip_line_to_box(c.base, c.dir, bounds, c.lo, c.hi)) return;
      if (reach && !clip_line_to_disk(c.base, c.dir, *reach, c.lo, c.hi)) return;
      // A segment interior only dominates inside its perpendicular strip.
      for (const SubSite* q : {&a, &b}) {
        if (q->is_point) continue;
        const Segment& seg = sites[static_cast<size_t>(q->segment)];
        const double p0 = dot(c.base - seg.a, q->t), dp = dot(c.dir, q->t);
        const double len = seg.length();
        if (std::abs(dp) < 1e-12) {
          if (p0 < -1e-9 || p0 > len + 1e-9) return;
          continue;
        }
        double s0 = (-1e-9 - p0) / dp, s1 = (len + 1e-9 - p0) / dp;
        if (s0 > s1) std::swap(s0, s1);
        c.lo = std::max(c.lo, s0);
        c.hi = std::min(c.hi, s1);
        if (!(c.lo < c.hi)) return;
      }
      out.push_back(c);
    };
    if (a.is_point && b.is_point) {
      line_curve(b.p - a.p, 0.5 * (dot(b.p, b.p) - dot(a.p, a.p)));
    } else if (!a.is_point && !b.is_point) {
      const bool same_line = std::abs(std::abs(dot(a.n, b.n)) - 1.0) < 1e-12 &&
                             std::abs(dot(a.n, b.n) > 0 ? a.c - b.c : a.c + b.c) < 1e-9;
      if (same_line) return out;
      line_curve(a.n - b.n, a.c - b.c);
      line_curve(a.n + b.n, a.c + b.c);
    } else {
      const SubSite& pt = a.is_point ? a : b;
      const SubSite& ln = a.is_point ? b : a;
      const double sd = dot(ln.n, pt.p) - ln.c;
      const double f = std::abs(sd);
      if (f < 1e-9) return out;
      Curve c;
      c.parabola = true;
      c.f = f;
      c.t = ln.t;
      c.n = sd > 0 ? ln.n : -ln.n;
      c.foot = pt.p - sd * ln.n;
      const Segment& seg = sites[static_cast<size_t>(ln.segment)];
      const double ua = dot(seg.a - c.foot, c.t), ub = dot(seg.b - c.foot, c.t);
      c.lo = std::min(ua, ub);
      c.hi = std::max(ua, ub);
      if (reach) {
        const double r = distance(c.foot, reach->center) + reach->radius;
        c.lo = std::max(c.lo, -r);
        c.hi = std::min(c.hi, r);
      }
      const double span = std::max(bounds.xhi - bounds.xlo, bounds.yhi - bounds.ylo);
      const double umax = std::sqrt(std::max(0.0, 2.0 * f * (span + std::abs(sd)) + f * f)) + 1.0;
      c.lo = std::max(c.lo, -umax);
      c.hi = std::min(c.hi, umax);
      if (c.lo < c.hi) out.push_back(c);
    }
    return out;
  }
};

}  // namespace

double clearance(const std::vector<Segment>& sites, const Point2& p) {
  double best = kInf;
  for (const auto& s : sites) best = std::min(best, point_segment_distance(p, s));
  return best;
}

std::vector<Point2> linearize_parabola(const Point2& focus, const Segment& directrix, double u_begin,
                                       double u_end, double deviation) {
  if (!(deviation > 0.0)) throw InvalidArgument("linearize_parabola: deviation must be positive");
  const Point2 d = directrix.direction();
  const Point2 t = (1.0 / norm(d)) * d;
  const Point2 n0 = perp(t);
  const double sd = dot(focus - directrix.a, n0);
  const double f = std::abs(sd);
  if (f < 1e-12) throw InvalidArgument("linearize_parabola: focus lies on the directrix");
  const Point2 n = sd > 0 ? n0 : -n0;
  const Point2 foot = focus - sd * n0;
  auto at = [&](double u) { return foot + u * t + ((u * u + f * f) / (2.0 * f)) * n; };

  // The chord over a span h departs from w = u^2/(2f) by at most h^2/(8f)
  // vertically, which bounds the true distance.
  const double h_max = std::sqrt(8.0 * f * deviation);
  const double span = std::abs(u_end - u_begin);
  const int pieces = std::max(1, static_cast<int>(std::ceil(span / h_max - 1e-12)));
  std::vector<Point2> out;
  out.reserve(static_cast<size_t>(pieces) + 1);
  for (int i = 0; i <= pieces; ++i) {
    const double u = i == pieces ? u_end : u_begin + (u_end - u_begin) * i / pieces;
    out.push_back(at(u));
  }
  return out;
}

VoronoiDiagram build_voronoi(const std::vector<Segment>& sites, double deviation) {
  VoronoiOptions opt;
  opt.deviation = deviation;
  return build_voronoi(sites, opt);
}

VoronoiDiagram build_voronoi(const std::vector<Segment>& sites, const VoronoiOptions& opt) {
  if (sites.size() < 2) throw InvalidArgument("build_voronoi: need at least two sites");
  if (!(opt.deviation > 0.0) || !(opt.sample_step > 0.0))
    throw InvalidArgument("build_voronoi: deviation and sample step must be positive");
  for (const auto& s : sites) {
    if (!is_finite(s.a) || !is_finite(s.b) || s.length() < kMinSegmentLength)
      throw InvalidArgument("build_voronoi: degenerate site");
  }

  Builder bld{sites, opt, {}, {}, {}, std::nullopt};
  // Bounds: site extent padded by half its diagonal.
  Box2 ext{kInf, -kInf, kInf, -kInf};
  for (const auto& s : sites) {
    for (const Point2& p : {s.a, s.b}) {
      ext.xlo = std::min(ext.xlo, p.x);
      ext.xhi = std::max(ext.xhi, p.x);
      ext.ylo = std::min(ext.ylo, p.y);
      ext.yhi = std::max(ext.yhi, p.y);
    }
  }
  const double pad = std::max(1.0, 0.5 * std::hypot(ext.xhi - ext.xlo, ext.yhi - ext.ylo));
  bld.bounds = {ext.xlo - pad, ext.xhi + pad, ext.ylo - pad, ext.yhi + pad};

  // With a disk of radius r around c, a site can shape the diagram in the
  // disk only if its distance from c is within 2r of the nearest site.
  std::vector<bool> keep(sites.size(), true);
  if (opt.focus) {
    const Point2 c = opt.focus->center;
    const double near = clearance(sites, c);
    bld.reach = Circle{c, opt.focus->radius + 2.0 * (near + opt.focus->radius)};
    for (size_t k = 0; k < sites.size(); ++k)
      keep[k] = point_segment_distance(c, sites[k]) <= near + 2.0 * bld.reach->radius;
  }
  for (size_t k = 0; k < sites.size(); ++k)
    if (keep[k]) bld.active_segments.push_back(static_cast<int>(k));

  for (int k : bld.active_segments) {
    const Segment& s = sites[static_cast<size_t>(k)];
    SubSite in;
    in.segment = k;
    in.owners = {k};
    in.t = (1.0 / s.length()) * s.direction();
    in.n = perp(in.t);
    in.c = dot(in.n, s.a);
    bld.subs.push_back(in);
    for (const Point2& p : {s.a, s.b}) {
      auto it = std::find_if(bld.subs.begin(), bld.subs.end(),
                             [&](const SubSite& q) { return q.is_point && distance(q.p, p) <= 1e-9; });
      if (it != bld.subs.end()) {
        it->owners.push_back(k);
        continue;
      }
      SubSite pt;
      pt.is_point = true;
      pt.p = p;
      pt.segment = k;
      pt.owners = {k};
      bld.subs.push_back(pt);
    }
  }

  VoronoiDiagram out;
  out.sites = sites;
  out.scope = opt.scope;
  const auto in_region = [&](const Point2& p) { return !opt.region || opt.region(p); };

  for (size_t i = 0; i < bld.subs.size(); ++i) {
    for (size_t j = i + 1; j < bld.subs.size(); ++j) {
      const SubSite& a = bld.subs[i];
      const SubSite& b = bld.subs[j];
      // An interior and its own endpoint only bound each other along a
      // perpendicular that is never part of the medial axis.
      auto owns = [](const SubSite& ln, const SubSite& pt) {
        return !ln.is_point && pt.is_point &&
               std::find(pt.owners.begin(), pt.owners.end(), ln.segment) != pt.owners.end();
      };
      if (owns(a, b) || owns(b, a)) continue;

      // The run of a short segment interior is about as long as the segment.
      double step = opt.sample_step;
      for (const SubSite* q : {&a, &b})
        if (!q->is_point) step = std::min(step, 0.25 * sites[static_cast<size_t>(q->segment)].length());
      for (const Curve& c : bld.bisectors(a, b)) {
        auto ok = [&](const Point2& p) { return bld.dominant(a, b, p); };
        for (auto [s0, s1] : bld.runs(c, ok, step)) {
          if (s1 - s0 <= 1e-12) continue;
          const Point2 p0 = c.at(s0), p1 = c.at(s1);
          if (subsite_distance(a, sites, p0) < opt.prune_clearance ||
              subsite_distance(a, sites, p1) < opt.prune_clearance)
            continue;
          for (auto [r0, r1] : bld.runs(Curve{c.parabola, c.base, c.dir, c.foot, c.t, c.n, c.f, s0, s1},
                                        [&](const Point2& p) { return in_region(p) && bld.in_scope(p); }, step)) {
            if (r1 - r0 <= 1e-12) continue;
            VoronoiEdge e;
            const int sa = a.segment, sb = b.segment;
            e.site_pair = {std::min(sa, sb), std::max(sa, sb)};
            if (c.parabola) {
              const SubSite& pt = a.is_point ? a : b;
              const SubSite& ln = a.is_point ? b : a;
              e.kind = EdgeKind::kParabolic;
              e.polyline = linearize_parabola(pt.p, sites[static_cast<size_t>(ln.segment)], r0, r1, opt.deviation);
            } else {
              e.polyline = {c.at(r0), c.at(r1)};
            }
            // Sliver runs come from distance ties at shared site endpoints.
            if (e.polyline.size() == 2 && distance(e.polyline.front(), e.polyline.back()) < 1e-3) continue;
            out.edges.push_back(std::move(e));
          }
        }
      }
    }
  }
  return out;
}

std::string export_diagram(const VoronoiDiagram& d) {
  using nlohmann::json;
  json j;
  j["scope"] = d.scope == DiagramScope::kGlobal ? "global" : "local";
  json sites = json::array();
  for (const auto& s : d.sites) sites.push_back({round9(s.a.x), round9(s.a.y), round9(s.b.x), round9(s.b.y)});
  j["sites"] = sites;
  json edges = json::array();
  for (const auto& e : d.edges) {
    json pts = json::array();
    for (const auto& p : e.polyline) pts.push_back({round9(p.x), round9(p.y)});
    edges.push_back({{"sites", {e.site_pair.first, e.site_pair.second}},
                     {"kind", e.kind == EdgeKind::kLinear ? "linear" : "parabolic"},
                     {"vertices", pts}});
  }
  j["edges"] = edges;
  return j.dump(1);
}

}  // namespace rvp
