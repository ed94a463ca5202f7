#include "rvp/controller.hpp"

#include <algorithm>
#include <cmath>

#include "rvp/errors.hpp"

namespace rvp {

void VehicleParams::validate() const {
  if (!(wheelbase > 0.0)) throw InvalidArgument("vehicle: wheelbase must be positive");
  if (!(max_steer > 0.0 && max_steer < 0.5 * kPi)) throw InvalidArgument("vehicle: max steer must be in (0, pi/2)");
  if (!(speed > 0.0)) throw InvalidArgument("vehicle: speed must be positive");
  if (!(lookahead > 0.0)) throw InvalidArgument("vehicle: lookahead must be positive");
}

SteeringCommand pure_pursuit_steering(const Point2& g, const VehicleParams& params) {
  if (!(g.x > 0.0)) throw WaypointBehindAxle("pure pursuit: waypoint is not ahead of the rear axle");
  const double ell_sq = g.x * g.x + g.y * g.y;
  SteeringCommand cmd;
  cmd.alpha = std::atan2(g.y, g.x);
  cmd.raw = std::atan(2.0 * params.wheelbase * g.y / ell_sq);
  cmd.delta = std::clamp(cmd.raw, -params.max_steer, params.max_steer);
  cmd.clamped = cmd.delta != cmd.raw;
  return cmd;
}

VehicleState bicycle_step(const VehicleState& s, double delta, const VehicleParams& params, double dt) {
  const double v = params.speed;
  const double omega = v / params.wheelbase * std::tan(delta);
  // Heading rate is constant, so only x and y need the staged headings.
  struct D { double x, y, t; };
  auto f = [&](double theta) { return D{v * std::cos(theta), v * std::sin(theta), omega}; };
  const D k1 = f(s.theta);
  const D k2 = f(s.theta + 0.5 * dt * k1.t);
  const D k3 = f(s.theta + 0.5 * dt * k2.t);
  const D k4 = f(s.theta + dt * k3.t);
  VehicleState out;
  out.x = s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.y = s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  out.theta = normalize_angle(s.theta + dt * omega);
  return out;
}

std::optional<double> turning_radius(double delta, double wheelbase) {
  if (delta == 0.0) return std::nullopt;
  return wheelbase / std::tan(delta);
}

}  // namespace rvp
