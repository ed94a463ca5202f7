#pragma once

#include <string>
#include <vector>

#include "rvp/controller.hpp"
#include "rvp/geometry.hpp"
#include "rvp/perception.hpp"
#include "rvp/track.hpp"

namespace rvp {

struct ScenarioConfig {
  VehicleParams vehicle;
  LidarParams lidar;
  LinearizationParams linearization;
  double deviation = 0.01;        ///< parabola approximation bound, meters
  double control_period = 0.025;  ///< seconds between plans
  double max_substep = 0.005;     ///< integration step bound, seconds
  long max_steps = 4000;
  double inflation = 0.15;        ///< vehicle half-width; clearance at or below it is a collision
  double lap_fraction = 0.8;      ///< share of the circuit length to cover before the gate counts

  /// Throws InvalidArgument for out-of-range values.
  void validate() const;
};

/// Missing keys keep their defaults. Throws InvalidArgument on malformed content.
ScenarioConfig config_from_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& c);
/// Throws IoError when the file cannot be read.
ScenarioConfig load_config(const std::string& path);

enum class Outcome { kLapComplete, kCollision, kNoWaypoint, kTimeout };

const char* to_string(Outcome o);

struct StepRecord {
  double time = 0.0;
  Pose state;         ///< at the start of the control period
  Point2 waypoint;    ///< world frame
  double delta = 0.0;
  bool clamped = false;
  double clearance = 0.0;  ///< rear axle to the nearest wall
};

struct SimulationLog {
  std::vector<StepRecord> steps;
  Pose final_state;
  double final_clearance = 0.0;
  double distance = 0.0;  ///< path length driven
  Outcome outcome = Outcome::kTimeout;
  std::string diagnostic;
};

/// Segment across the channel through the start pose, perpendicular to its heading.
Segment start_gate(const Track& t);

/// Reactive loop, one plan per control period: scan, linearize, local
/// diagram, waypoint, pure pursuit, then bicycle sub-steps no longer than
/// max_substep. Stops on a forward gate crossing after lap_fraction of the
/// circuit, on a collision, when no waypoint exists, or after max_steps.
/// Throws InvalidArgument when the start pose is outside the channel.
SimulationLog run_simulation(const Track& t, const ScenarioConfig& c);

/// time,x,y,theta,waypoint_x,waypoint_y,delta,clamped,clearance; one row per step.
std::string log_to_csv(const SimulationLog& log);

}  // namespace rvp
