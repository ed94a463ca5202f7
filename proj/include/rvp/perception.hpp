#pragma once

#include <optional>
#include <vector>

#include "rvp/geometry.hpp"

namespace rvp {

/// Planar scanning range finder mounted ahead of the rear axle.
struct LidarParams {
  double range = 10.0;          ///< meters
  int beam_count = 1081;
  double fov = 1.5 * kPi;       ///< radians, centered on the heading
  double period = 0.025;        ///< seconds between scans
  double mount_offset = 0.325;  ///< meters ahead of the rear axle

  void validate() const;
  /// Range value stored for beams that see nothing within `range`.
  double no_hit_range() const { return range + 1.0; }
};

struct LidarScan {
  Pose pose_at_capture;
  Point2 origin;            ///< lidar position in the world frame
  std::vector<double> angles;  ///< relative to heading, strictly increasing
  std::vector<double> ranges;
  double max_range = 10.0;

  bool is_hit(size_t i) const { return ranges[i] <= max_range; }
  Point2 point(size_t i) const;
  size_t size() const { return angles.size(); }
};

struct LinearizationParams {
  double max_deviation = 0.05;     ///< epsilon, meters
  double colinearity_angle = 0.15; ///< radians
  double connectivity_gap = 0.3;   ///< meters

  void validate() const;
};

struct LinearizedScan {
  std::vector<Segment> segments;
  /// Segment covering each beam, -1 for no-hit beams.
  std::vector<int> beam_segment;
  /// Midpoints of connectivity breaks between consecutive echoes.
  std::vector<Point2> gap_midpoints;
};

/// Ray-casts every beam against the walls. Throws InvalidState when the rear
/// axle or the lidar has no positive clearance.
LidarScan simulate_scan(const std::vector<Segment>& walls, const Pose& pose, const LidarParams& params);

/// One-pass greedy linearization with bounded interpolation error.
LinearizedScan linearize_scan(const LidarScan& scan, const LinearizationParams& params);

/// True when `p` lies in the free space swept by the scan (closer than the
/// measured range along its bearing).
bool in_visible_region(const LidarScan& scan, const Point2& p);

}  // namespace rvp
