#include "rvp/simulation.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rvp/errors.hpp"
#include "rvp/numeric_format.hpp"
#include "rvp/planner.hpp"
#include "rvp/voronoi.hpp"

namespace rvp {

void ScenarioConfig::validate() const {
  vehicle.validate();
  lidar.validate();
  linearization.validate();
  if (!(deviation > 0.0)) throw InvalidArgument("config: deviation must be positive");
  if (!(control_period > 0.0) || !(max_substep > 0.0)) throw InvalidArgument("config: periods must be positive");
  if (max_steps < 1) throw InvalidArgument("config: max_steps must be positive");
  if (!(inflation >= 0.0)) throw InvalidArgument("config: inflation must be non-negative");
  if (!(lap_fraction > 0.0 && lap_fraction <= 1.0)) throw InvalidArgument("config: lap_fraction must lie in (0, 1]");
}

ScenarioConfig config_from_json(const std::string& text) {
  using nlohmann::json;
  ScenarioConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw InvalidArgument("config: expected an object");
    auto get = [](const json& o, const char* key, auto& field) {
      if (o.contains(key)) field = o.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("vehicle")) {
      const json& v = j.at("vehicle");
      get(v, "wheelbase", c.vehicle.wheelbase);
      get(v, "max_steer", c.vehicle.max_steer);
      get(v, "speed", c.vehicle.speed);
      get(v, "lookahead", c.vehicle.lookahead);
    }
    if (j.contains("lidar")) {
      const json& l = j.at("lidar");
      get(l, "range", c.lidar.range);
      get(l, "beam_count", c.lidar.beam_count);
      get(l, "fov", c.lidar.fov);
      get(l, "period", c.lidar.period);
      get(l, "mount_offset", c.lidar.mount_offset);
    }
    if (j.contains("linearization")) {
      const json& l = j.at("linearization");
      get(l, "max_deviation", c.linearization.max_deviation);
      get(l, "colinearity_angle", c.linearization.colinearity_angle);
      get(l, "connectivity_gap", c.linearization.connectivity_gap);
    }
    get(j, "deviation", c.deviation);
    get(j, "control_period", c.control_period);
    get(j, "max_substep", c.max_substep);
    get(j, "max_steps", c.max_steps);
    get(j, "inflation", c.inflation);
    get(j, "lap_fraction", c.lap_fraction);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: malformed JSON: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const ScenarioConfig& c) {
  using nlohmann::json;
  json j;
  j["vehicle"] = {{"wheelbase", round9(c.vehicle.wheelbase)},
                  {"max_steer", round9(c.vehicle.max_steer)},
                  {"speed", round9(c.vehicle.speed)},
                  {"lookahead", round9(c.vehicle.lookahead)}};
  j["lidar"] = {{"range", round9(c.lidar.range)},
                {"beam_count", c.lidar.beam_count},
                {"fov", round9(c.lidar.fov)},
                {"period", round9(c.lidar.period)},
                {"mount_offset", round9(c.lidar.mount_offset)}};
  j["linearization"] = {{"max_deviation", round9(c.linearization.max_deviation)},
                        {"colinearity_angle", round9(c.linearization.colinearity_angle)},
                        {"connectivity_gap", round9(c.linearization.connectivity_gap)}};
  j["deviation"] = round9(c.deviation);
  j["control_period"] = round9(c.control_period);
  j["max_substep"] = round9(c.max_substep);
  j["max_steps"] = c.max_steps;
  j["inflation"] = round9(c.inflation);
  j["lap_fraction"] = round9(c.lap_fraction);
  return j.dump(1);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kLapComplete: return "lap-complete";
    case Outcome::kCollision: return "collision";
    case Outcome::kNoWaypoint: return "no-waypoint";
    case Outcome::kTimeout: return "timeout";
  }
  return "?";
}

Segment start_gate(const Track& t) {
  const Point2 p = t.start.position();
  const Point2 n = perp(t.start.heading());
  const auto walls = t.walls();
  auto reach = [&](const Point2& dir) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : walls)
      if (const auto hit = ray_segment_hit(p, dir, w)) best = std::min(best, *hit);
    if (!std::isfinite(best)) throw InvalidArgument("start gate: the channel is open beside the start pose");
    return best;
  };
  return {p - reach(-1.0 * n) * n, p + reach(n) * n};
}

SimulationLog run_simulation(const Track& t, const ScenarioConfig& c) {
  c.validate();
  if (!t.in_channel(t.start.position())) throw InvalidArgument("simulation: start pose is outside the channel");
  const auto walls = t.walls();
  double lap_length = std::numeric_limits<double>::infinity();
  try {
    lap_length = chain_length(build_circuit(t, c.deviation));
  } catch (const TopologyError&) {
  }
  const Segment gate = start_gate(t);
  const Point2 forward = t.start.heading();
  const long substeps = std::max(1L, static_cast<long>(std::ceil(c.control_period / c.max_substep - 1e-9)));
  const double h = c.control_period / static_cast<double>(substeps);

  SimulationLog log;
  Pose pose = t.start;
  auto finish = [&](Outcome o, std::string why) {
    log.outcome = o;
    log.diagnostic = std::move(why);
    log.final_state = pose;
    log.final_clearance = clearance(walls, pose.position());
    return log;
  };

  for (long k = 0; k < c.max_steps; ++k) {
    StepRecord rec;
    rec.time = static_cast<double>(k) * c.control_period;
    rec.state = pose;
    rec.clearance = clearance(walls, pose.position());
    if (rec.clearance <= c.inflation) return finish(Outcome::kCollision, "rear axle within the inflation radius of a wall");
    try {
      const LidarScan scan = simulate_scan(walls, pose, c.lidar);
      const LinearizedScan lin = linearize_scan(scan, c.linearization);
      const Waypoint wp = select_waypoint(local_diagram(scan, lin, c.vehicle.lookahead, c.deviation), pose,
                                          c.vehicle.lookahead);
      const SteeringCommand cmd = pure_pursuit_steering(wp.rear_frame, c.vehicle);
      rec.waypoint = wp.position;
      rec.delta = cmd.delta;
      rec.clamped = cmd.clamped;
    } catch (const InvalidState& e) {
      return finish(Outcome::kCollision, e.what());
    } catch (const NoWaypoint& e) {
      return finish(Outcome::kNoWaypoint, e.what());
    } catch (const WaypointBehindAxle& e) {
      return finish(Outcome::kNoWaypoint, e.what());
    }
    log.steps.push_back(rec);

    for (long i = 0; i < substeps; ++i) {
      const Pose prev = pose;
      pose = bicycle_step(pose, rec.delta, c.vehicle, h);
      log.distance += distance(prev.position(), pose.position());
      if (clearance(walls, pose.position()) <= c.inflation)
        return finish(Outcome::kCollision, "rear axle within the inflation radius of a wall");
      const Segment moved{prev.position(), pose.position()};
      if (log.distance >= c.lap_fraction * lap_length && dot(moved.direction(), forward) > 0.0 &&
          segments_intersect(moved, gate))
        return finish(Outcome::kLapComplete, "");
    }
  }
  return finish(Outcome::kTimeout, "step budget exhausted");
}

std::string log_to_csv(const SimulationLog& log) {
  std::string out = "time,x,y,theta,waypoint_x,waypoint_y,delta,clamped,clearance\n";
  for (const auto& r : log.steps) {
    out += fmt9(r.time) + "," + fmt9(r.state.x) + "," + fmt9(r.state.y) + "," + fmt9(r.state.theta) + "," +
           fmt9(r.waypoint.x) + "," + fmt9(r.waypoint.y) + "," + fmt9(r.delta) + "," + (r.clamped ? "1" : "0") + "," +
           fmt9(r.clearance) + "\n";
  }
  return out;
}

}  // namespace rvp
