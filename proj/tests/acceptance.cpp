#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rvp/controller.hpp"
#include "rvp/errors.hpp"
#include "rvp/hybrid_model.hpp"
#include "rvp/numeric_format.hpp"
#include "rvp/perception.hpp"
#include "rvp/planner.hpp"
#include "rvp/reachability.hpp"
#include "rvp/simulation.hpp"
#include "rvp/track.hpp"
#include "rvp/voronoi.hpp"

using namespace rvp;

namespace {

struct Check {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f9(double v) { return fmt9(v); }

// Steering from the arc through the rear axle and the waypoint.
double geometric_steering(const Point2& g, double wheelbase) {
  const double alpha = std::atan2(g.y, g.x);
  if (alpha == 0.0) return 0.0;
  const double radius = norm(g) / (2.0 * std::sin(alpha));
  return std::atan(wheelbase / radius);
}

VehicleParams unclamped() {
  VehicleParams p;
  p.max_steer = 0.5 * kPi - 1e-9;
  return p;
}

Check pure_pursuit_oracle() {
  const auto t0 = Clock::now();
  const VehicleParams p = unclamped();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(-0.5 * kPi + 1e-3, 0.5 * kPi - 1e-3), ul(0.1, 5.0);
  double worst = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double a = ua(rng), l = ul(rng);
    const Point2 g{l * std::cos(a), l * std::sin(a)};
    worst = std::max(worst, std::abs(pure_pursuit_steering(g, p).delta - geometric_steering(g, p.wheelbase)));
  }
  const double el = seconds_since(t0);
  return {worst <= 1e-12 && el < 5.0,
          std::to_string(n) + " cases, max |error| " + f9(worst) + " (tol 1e-12), " + f9(el) + " s (limit 5)"};
}

Check coupled_matches_controller() {
  const VehicleParams p = unclamped();
  const double ell = p.lookahead;
  VoronoiDiagram d;
  d.sites = {{{-200, -1}, {200, -1}}, {{-200, 1}, {200, 1}}};
  d.edges.push_back({{{-200, 0}, {200, 0}}, {0, 1}, EdgeKind::kLinear});
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ux(-50.0, 50.0), uy(-0.99 * ell, 0.99 * ell),
      ut(-0.5 * kPi + 0.02, 0.5 * kPi - 0.02);
  double worst = 0.0;
  int n = 0, skipped = 0;
  while (n < 100000) {
    const Pose pose{ux(rng), uy(rng), ut(rng)};
    Waypoint w;
    try {
      w = select_waypoint(d, pose, ell);
    } catch (const NoWaypoint&) {
      ++skipped;
      continue;
    }
    if (!(w.rear_frame.x > 1e-6)) {
      ++skipped;
      continue;
    }
    const double via_controller = p.speed / p.wheelbase * std::tan(pure_pursuit_steering(w.rear_frame, p).delta);
    const double via_field = coupled_dynamics({pose.x, pose.y, pose.theta}, p.speed, ell).theta;
    worst = std::max(worst, std::abs(via_controller - via_field));
    ++n;
  }
  return {worst <= 1e-9, std::to_string(n) + " states, max |error| " + f9(worst) + " (tol 1e-9), " +
                            std::to_string(skipped) + " draws without a forward waypoint skipped"};
}

struct AgreementStats {
  int poses = 0, beyond = 0, failures = 0;
  double worst = 0.0;
};

// Local and global waypoints at random poses near the circuit whose lidar
// keeps at least min_lidar from the walls.
AgreementStats compare_waypoints(const Track& t, int count, double lateral, double heading, double min_lidar,
                                 double bound, unsigned seed) {
  const ScenarioConfig c;
  const auto walls = t.walls();
  VoronoiOptions go;
  go.deviation = c.deviation;
  go.region = [&t](const Point2& p) { return t.in_channel(p); };
  const VoronoiDiagram global = build_voronoi(walls, go);
  const auto circuit = build_circuit(t, c.deviation);
  const double len = chain_length(circuit);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AgreementStats st;
  while (st.poses < count) {
    double s = u(rng) * len;
    size_t k = 0;
    while (k + 1 < circuit.size() && s > circuit[k].length()) s -= circuit[k].length(), ++k;
    const Point2 dir = (1.0 / circuit[k].length()) * circuit[k].direction();
    const Point2 p = circuit[k].a + s * dir + (lateral * (2.0 * u(rng) - 1.0)) * perp(dir);
    const Pose pose{p.x, p.y, std::atan2(dir.y, dir.x) + heading * (2.0 * u(rng) - 1.0)};
    const Point2 lidar = p + c.lidar.mount_offset * pose.heading();
    if (!t.in_channel(p) || !t.in_channel(lidar) || clearance(walls, lidar) < min_lidar ||
        clearance(walls, p) <= c.inflation)
      continue;
    ++st.poses;
    try {
      const LidarScan scan = simulate_scan(walls, pose, c.lidar);
      const LinearizedScan lin = linearize_scan(scan, c.linearization);
      const Waypoint a = select_waypoint(local_diagram(scan, lin, c.vehicle.lookahead, c.deviation), pose,
                                         c.vehicle.lookahead);
      const Waypoint b = select_waypoint(global, pose, c.vehicle.lookahead);
      const double gap = distance(a.position, b.position);
      st.worst = std::max(st.worst, gap);
      st.beyond += gap > bound;
    } catch (const std::exception&) {
      ++st.failures;
    }
  }
  return st;
}

ConsistencyReport consistency_of(const Track& t, double min_distance) {
  const ScenarioConfig c;
  std::vector<std::vector<Point2>> axis;
  for (const auto& s : build_circuit(t, c.deviation)) axis.push_back({s.a, s.b});
  return check_consistency_conditions(measure_widths(axis, t.walls()), c.lidar.range, c.lidar.mount_offset,
                                      c.vehicle.lookahead, min_distance);
}

Check local_global_agreement() {
  const auto t0 = Clock::now();
  const ScenarioConfig c;
  const double bound = 2.0 * (c.linearization.max_deviation + c.deviation);

  const Track good = generate_track(default_params(TrackKind::kRectangle));
  const double d_good = 0.9;
  const ConsistencyReport rg = consistency_of(good, d_good);
  const AgreementStats sg = compare_waypoints(good, 500, 0.3, 0.3, d_good, bound, 21);

  // Thin divider: both lanes are 0.5 wide, so the clearance condition fails even at D = m/2.
  Track bad;
  bad.name = "hairpin";
  bad.outer = {{0, 0}, {10, 0}, {10, 1.1}, {0, 1.1}};
  bad.inner = {{1, 0.5}, {9, 0.5}, {9, 0.6}, {1, 0.6}};
  bad.start = {5, 0.25, 0};
  const ConsistencyReport rb = consistency_of(bad, 0.25);
  const AgreementStats sb = compare_waypoints(bad, 200, 0.05, 0.5, 0.0, bound, 22);
  const double el = seconds_since(t0);

  const bool good_ok = rg.all() && sg.poses == 500 && sg.beyond == 0 && sg.failures == 0;
  const bool bad_ok = !rb.clearance_ok && sb.beyond >= 1;
  std::string detail = "rectangle conditions " + std::string(rg.all() ? "hold" : "fail") + ", ";
  detail += std::to_string(sg.poses) + " poses, max gap " + f9(sg.worst) + " (bound " + f9(bound) + "), ";
  detail += std::to_string(sg.beyond) + " beyond, " + std::to_string(sg.failures) + " failed queries; ";
  detail += "hairpin clearance condition " + std::string(rb.clearance_ok ? "holds" : "fails") + ", ";
  detail += std::to_string(sb.beyond) + "/" + std::to_string(sb.poses) + " beyond, max gap " + f9(sb.worst) + ", ";
  detail += std::to_string(sb.failures) + " failed queries; " + f9(el) + " s (limit 60)";
  return {good_ok && bad_ok && el < 60.0, detail};
}

CoupledState sample(const Box3& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {b.x.lo + b.x.width() * u(rng), b.y.lo + b.y.width() * u(rng), b.theta.lo + b.theta.width() * u(rng)};
}

// Sampled executions that leave every same-mode slab whose time window holds them.
long count_misses(const PartitionReport& rep, const HybridAutomaton& aut, const Box3& theta, int runs, double horizon,
                  unsigned seed, long& samples) {
  std::vector<const FlowpipeSlab*> slabs;
  for (const auto& p : rep.parts)
    if (p.result)
      for (const auto& s : p.result->slabs) slabs.push_back(&s);
  std::mt19937_64 rng(seed);
  long misses = 0;
  for (int i = 0; i < runs; ++i) {
    HybridSimOptions so;
    so.horizon = horizon;
    for (const auto& h : simulate_hybrid(aut, 0, sample(theta, rng), so)) {
      ++samples;
      bool hit = false;
      for (const auto* s : slabs)
        if (s->mode == h.mode && h.time >= s->t0 - 1e-9 && h.time <= s->t1 + 1e-9 && s->box.contains(h.state, 1e-9)) {
          hit = true;
          break;
        }
      misses += !hit;
    }
  }
  return misses;
}

Check flowpipe_soundness() {
  const auto t0 = Clock::now();
  SplitPolicy sp;
  sp.accelerate = false;
  sp.keep_results = true;

  const std::vector<Point2> pts{{0, 3}, {0, -4}, {2, -6}, {14, -6}};
  std::vector<Segment> path;
  for (size_t i = 0; i + 1 < pts.size(); ++i) path.push_back({pts[i], pts[i + 1]});
  const HybridAutomaton turn = build_path_automaton(path, {1.0, 1.0});
  const Box3 turn_theta{{1.9, 2.1}, {0.0, 0.5}, {-0.5, -0.5}};
  ReachOptions ot;
  SplitPolicy st = sp;
  st.max_width = {0.0, 0.25, 0.0};
  const PartitionReport rt = verify_with_partitions(turn, turn_theta, {}, ot, st);
  long turn_samples = 0;
  const long turn_miss = count_misses(rt, turn, turn_theta, 1000, ot.horizon, 31, turn_samples);

  TrackParams sq;
  sq.kind = TrackKind::kPolygon;
  sq.polygon = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  const Track square = generate_track(sq);
  const HybridAutomaton loop = build_automaton(verification_circuit(build_circuit(square, 0.01), 1.0), {1.0, 1.0});
  const Box3 loop_theta = Box3::around(nominal_entry(loop), 0.12, 0.12, 0.12);
  ReachOptions ol;
  ol.horizon = 40.0;
  ol.stop_at_fixed_point = false;
  const PartitionReport rl = verify_with_partitions(loop, loop_theta, make_unsafe_set(square.walls(), 0.15), ol, sp);
  long loop_samples = 0;
  const long loop_miss = count_misses(rl, loop, loop_theta, 1000, ol.horizon, 32, loop_samples);
  const double el = seconds_since(t0);

  const bool pass = turn_miss == 0 && loop_miss == 0 && turn_samples > 0 && loop_samples > 0 && el < 300.0;
  return {pass, "single turn " + std::to_string(turn_miss) + "/" + std::to_string(turn_samples) +
                    " samples outside, square circuit " + std::to_string(loop_miss) + "/" +
                    std::to_string(loop_samples) + " outside (1000 runs each); " + f9(el) + " s (limit 300)"};
}

HybridAutomaton track_automaton(const Track& t) {
  return build_automaton(verification_circuit(build_circuit(t, 0.01), 1.0), {1.0, 1.0});
}

ReachOptions lap_options() {
  ReachOptions o;
  o.dt = 0.02;
  o.max_laps = 5;
  o.horizon = 150.0;
  return o;
}

Check circuits_verify() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (auto kind : {TrackKind::kRectangle, TrackKind::kLShape, TrackKind::kTriangle}) {
    const Track t = generate_track(default_params(kind));
    const HybridAutomaton aut = track_automaton(t);
    const Box3 theta = Box3::around(nominal_entry(aut), 0.05, 0.05, 0.05);
    const PartitionReport rep = verify_with_partitions(aut, theta, make_unsafe_set(t.walls(), 0.15), lap_options(), {});
    bool ok = rep.verdict == Verdict::kSafe;
    int last_lap = -1;
    for (const auto& p : rep.parts) {
      ok = ok && p.fixed_point.has_value() && p.fixed_point->lap + 1 <= 5;
      if (p.fixed_point) last_lap = std::max(last_lap, p.fixed_point->lap + 1);
    }
    pass = pass && ok;
    detail += t.name + " " + to_string(rep.verdict) + " (fixed point at lap " + std::to_string(last_lap) + ", " +
              std::to_string(rep.parts.size()) + " part" + (rep.parts.size() == 1 ? "" : "s") + "); ";
  }
  const double el = seconds_since(t0);
  pass = pass && el < 600.0;
  return {pass, detail + f9(el) + " s (limit 600)"};
}

Check partition_acceleration() {
  const Track t = generate_track(default_params(TrackKind::kRectangle));
  const HybridAutomaton aut = track_automaton(t);
  const UnsafeSet u = make_unsafe_set(t.walls(), 0.15);
  const Box3 theta = Box3::around(nominal_entry(aut), 0.1, 0.1, 0.1);
  SplitPolicy sp;
  sp.max_width = {0.1, 0.1, 0.1};
  const PartitionReport fast = verify_with_partitions(aut, theta, u, lap_options(), sp);
  sp.accelerate = false;
  const PartitionReport slow = verify_with_partitions(aut, theta, u, lap_options(), sp);
  int halted = 0;
  for (const auto& p : fast.parts) halted += p.halted_by_containment;
  const double ratio = static_cast<double>(fast.total_slabs) / static_cast<double>(slow.total_slabs);
  const bool pass = halted >= 1 && ratio < 0.7 && fast.verdict == Verdict::kSafe;
  return {pass, std::to_string(fast.parts.size()) + " parts, " + std::to_string(halted) + " halted, " +
                    std::to_string(fast.total_slabs) + " vs " + std::to_string(slow.total_slabs) + " slabs, ratio " +
                    f9(ratio) + " (limit 0.7), verdict " + to_string(fast.verdict)};
}

Check reactive_laps() {
  const ScenarioConfig c;
  bool pass = c.control_period == 0.025;
  std::string detail;
  for (auto kind : {TrackKind::kRectangle, TrackKind::kLShape, TrackKind::kTriangle}) {
    const Track t = generate_track(default_params(kind));
    const SimulationLog a = run_simulation(t, c);
    const SimulationLog b = run_simulation(t, c);
    double least = INFINITY;
    for (const auto& r : a.steps) least = std::min(least, r.clearance);
    least = std::min(least, a.final_clearance);
    const bool same = log_to_csv(a) == log_to_csv(b);
    pass = pass && a.outcome == Outcome::kLapComplete && least > c.inflation && same;
    detail += t.name + " " + to_string(a.outcome) + " in " + std::to_string(a.steps.size()) + " steps, min clearance " +
              f9(least) + (same ? ", identical rerun" : ", rerun differs") + "; ";
  }
  return {pass, detail.substr(0, detail.size() - 2)};
}

Check rk4_order() {
  VehicleParams p;
  const double delta = 0.3, horizon = 2.0;
  const double radius = p.wheelbase / std::tan(delta), omega = p.speed / radius;
  const Pose exact{radius * std::sin(omega * horizon), radius * (1.0 - std::cos(omega * horizon)), omega * horizon};
  auto error = [&](int steps) {
    Pose s{0, 0, 0};
    const double h = horizon / steps;
    for (int i = 0; i < steps; ++i) s = bicycle_step(s, delta, p, h);
    return std::hypot(s.x - exact.x, s.y - exact.y, s.theta - exact.theta);
  };
  const double coarse = error(20), fine = error(40);
  const double ratio = coarse / fine;
  return {std::abs(ratio - 16.0) <= 0.2 * 16.0,
          "error " + f9(coarse) + " at h=0.1, " + f9(fine) + " at h=0.05, ratio " + f9(ratio) + " (16 +- 20%)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"pure pursuit matches the geometric oracle", pure_pursuit_oracle},
      {"coupled heading rate equals (v/L) tan(delta) via planner and controller", coupled_matches_controller},
      {"local and global waypoints agree when the conditions hold", local_global_agreement},
      {"flowpipes contain sampled executions", flowpipe_soundness},
      {"generated circuits verify safe with a lap fixed point", circuits_verify},
      {"partition acceleration halts parts and saves slabs", partition_acceleration},
      {"reactive laps without collision, deterministic logs", reactive_laps},
      {"bicycle RK4 Richardson ratio", rk4_order},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Check o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - static_cast<size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
