#include "rvp/perception.hpp"

#include <algorithm>
#include <cmath>

#include "rvp/errors.hpp"

namespace rvp {

void LidarParams::validate() const {
  if (!(range > 0.0)) throw InvalidArgument("lidar: range must be positive");
  if (beam_count < 2) throw InvalidArgument("lidar: need at least two beams");
  if (!(fov > 0.0 && fov <= 2.0 * kPi)) throw InvalidArgument("lidar: fov must be in (0, 2pi]");
  if (!(period > 0.0)) throw InvalidArgument("lidar: period must be positive");
  if (!(mount_offset >= 0.0)) throw InvalidArgument("lidar: mount offset must be non-negative");
}

void LinearizationParams::validate() const {
  if (!(max_deviation > 0.0 && colinearity_angle > 0.0 && connectivity_gap > 0.0))
    throw InvalidArgument("linearization: thresholds must be positive");
}

Point2 LidarScan::point(size_t i) const {
  const double a = pose_at_capture.theta + angles[i];
  return origin + ranges[i] * Point2{std::cos(a), std::sin(a)};
}

LidarScan simulate_scan(const std::vector<Segment>& walls, const Pose& pose, const LidarParams& params) {
  params.validate();
  LidarScan scan;
  scan.pose_at_capture = pose;
  scan.origin = pose.position() + params.mount_offset * pose.heading();
  scan.max_range = params.range;
  for (const auto& w : walls) {
    if (point_segment_distance(pose.position(), w) <= 0.0 || point_segment_distance(scan.origin, w) <= 0.0)
      throw InvalidState("simulate_scan: pose touches a wall");
  }

  const int n = params.beam_count;
  const bool full_circle = params.fov >= 2.0 * kPi;
  const double step = full_circle ? params.fov / n : params.fov / (n - 1);
  scan.angles.resize(static_cast<size_t>(n));
  scan.ranges.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double rel = -0.5 * params.fov + step * i;
    const double a = pose.theta + rel;
    const Point2 dir{std::cos(a), std::sin(a)};
    double best = params.no_hit_range();
    for (const auto& w : walls) {
      if (auto t = ray_segment_hit(scan.origin, dir, w); t && *t <= params.range) best = std::min(best, *t);
    }
    scan.angles[static_cast<size_t>(i)] = rel;
    scan.ranges[static_cast<size_t>(i)] = best;
  }
  return scan;
}

namespace {

double chord_deviation(const std::vector<Point2>& pts, const Point2& a, const Point2& b) {
  const Segment chord{a, b};
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, point_segment_distance(p, chord));
  return worst;
}

double turn_angle(const Point2& d0, const Point2& d1) {
  return std::abs(std::atan2(cross(d0, d1), dot(d0, d1)));
}

// Accumulates the run of points covered by the segment under construction.
struct Run {
  std::vector<Point2> points;
  std::vector<size_t> beams;

  void clear() { points.clear(); beams.clear(); }
  void push(const Point2& p, size_t beam) { points.push_back(p); beams.push_back(beam); }
};

}  // namespace

LinearizedScan linearize_scan(const LidarScan& scan, const LinearizationParams& params) {
  params.validate();
  LinearizedScan out;
  out.beam_segment.assign(scan.size(), -1);
  Run run;

  auto emit = [&](const Run& r) {
    if (r.points.empty()) return;
    Segment s{r.points.front(), r.points.back()};
    if (s.length() < kMinSegmentLength) {
      // Isolated echo: a short stub across the beam keeps it as an obstacle.
      const Point2 d = r.points.front() - scan.origin;
      const Point2 t = (1.0 / std::max(norm(d), 1e-12)) * perp(d);
      s = {r.points.front() - 5e-4 * t, r.points.front() + 5e-4 * t};
    }
    const int id = static_cast<int>(out.segments.size());
    out.segments.push_back(s);
    for (size_t b : r.beams) out.beam_segment[b] = id;
  };

  for (size_t i = 0; i < scan.size(); ++i) {
    if (!scan.is_hit(i)) {
      emit(run);
      run.clear();
      continue;
    }
    const Point2 p = scan.point(i);
    if (run.points.empty()) {
      run.push(p, i);
      continue;
    }
    const Point2 last = run.points.back();
    if (distance(p, last) > params.connectivity_gap) {
      out.gap_midpoints.push_back(0.5 * (p + last));
      emit(run);
      run.clear();
      run.push(p, i);
      continue;
    }
    if (run.points.size() == 1) {
      run.push(p, i);
      continue;
    }
    const Point2 first = run.points.front();
    bool split = turn_angle(last - first, p - last) > params.colinearity_angle;
    if (!split) split = chord_deviation(run.points, first, p) > params.max_deviation;
    if (split) {
      emit(run);
      const size_t last_beam = run.beams.back();
      run.clear();
      run.push(last, last_beam);
    }
    run.push(p, i);
  }
  emit(run);
  return out;
}

bool in_visible_region(const LidarScan& scan, const Point2& p) {
  if (scan.size() < 2) return false;
  const Point2 d = p - scan.origin;
  const double r = norm(d);
  if (r == 0.0) return true;
  const double rel = normalize_angle(std::atan2(d.y, d.x) - scan.pose_at_capture.theta);
  if (rel < scan.angles.front() || rel > scan.angles.back()) return false;
  auto it = std::upper_bound(scan.angles.begin(), scan.angles.end(), rel);
  size_t hi = static_cast<size_t>(it - scan.angles.begin());
  if (hi >= scan.size()) hi = scan.size() - 1;
  const size_t lo = hi == 0 ? 0 : hi - 1;
  const double limit = std::min(std::min(scan.ranges[lo], scan.ranges[hi]), scan.max_range);
  return r < limit;
}

}  // namespace rvp
