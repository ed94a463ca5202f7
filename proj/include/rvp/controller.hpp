#pragma once

#include <optional>

#include "rvp/geometry.hpp"

namespace rvp {

struct VehicleParams {
  double wheelbase = 0.325;              ///< L, meters
  double max_steer = 34.0 * kPi / 180.0; ///< radians
  double speed = 1.0;                    ///< m/s, constant
  double lookahead = 1.0;                ///< meters

  void validate() const;
};

/// Rear-axle position and heading.
using VehicleState = Pose;

struct SteeringCommand {
  double delta = 0.0;   ///< applied steering angle after clamping
  double raw = 0.0;     ///< unclamped pure-pursuit angle
  double alpha = 0.0;   ///< bearing of the waypoint in the rear-axle frame
  bool clamped = false;
};

/// Pure pursuit toward a waypoint given in the rear-axle frame. The lookahead
/// is taken as |g|. Throws WaypointBehindAxle when g.x <= 0.
SteeringCommand pure_pursuit_steering(const Point2& g, const VehicleParams& params);

/// One classical RK4 step of the kinematic bicycle model at constant steering.
VehicleState bicycle_step(const VehicleState& s, double delta, const VehicleParams& params, double dt);

/// Signed radius L / tan(delta) of the rear-axle circle; nullopt means straight.
std::optional<double> turning_radius(double delta, double wheelbase);

}  // namespace rvp
