#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rvp/artifacts.hpp"
#include "rvp/errors.hpp"
#include "rvp/hybrid_model.hpp"
#include "rvp/numeric_format.hpp"
#include "rvp/planner.hpp"
#include "rvp/reachability.hpp"
#include "rvp/simulation.hpp"
#include "rvp/track.hpp"

using namespace rvp;

namespace {

constexpr int kOk = 0;
constexpr int kUnsafe = 2;
constexpr int kInconclusive = 3;
constexpr int kError = 1;

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::string box_text(const Box3& b) {
  return fmt9(b.x.lo) + "," + fmt9(b.x.hi) + "," + fmt9(b.y.lo) + "," + fmt9(b.y.hi) + "," + fmt9(b.theta.lo) + "," +
         fmt9(b.theta.hi);
}

struct GenArgs {
  std::string kind = "rectangle";
  std::string out;
  double width = 2.0, length = 10.0, height = 6.0, side = 12.0, arm = 5.0;
};

int gen_track(const GenArgs& a) {
  TrackParams p = default_params(parse_track_kind(a.kind));
  if (p.kind == TrackKind::kPolygon) throw InvalidArgument("gen-track: polygon tracks are written by hand");
  p.width = a.width;
  if (p.kind == TrackKind::kRectangle) p.length = a.length, p.height = a.height;
  if (p.kind == TrackKind::kLShape) p.length = a.length, p.height = a.height, p.arm = a.arm;
  if (p.kind == TrackKind::kTriangle) p.side = a.side;
  const Track t = generate_track(p);
  save_track(t, a.out);
  std::printf("wrote %s (%s)\n", a.out.c_str(), t.name.c_str());
  return kOk;
}

struct SimArgs {
  std::string track, config, out_dir = ".";
};

int simulate(const SimArgs& a) {
  const Track t = load_track(a.track);
  const ScenarioConfig c = a.config.empty() ? ScenarioConfig{} : load_config(a.config);
  const SimulationLog log = run_simulation(t, c);
  ensure_dir(a.out_dir);
  Scene s = scene_from_track(t);
  try {
    add_circuit(s, build_circuit(t, c.deviation));
  } catch (const TopologyError&) {
  }
  add_log(s, log);
  write_text(join(a.out_dir, "log.csv"), log_to_csv(log));
  write_text(join(a.out_dir, "scene.json"), scene_to_json(s) + "\n");
  write_text(join(a.out_dir, "trajectory.svg"), render_svg(s));
  nlohmann::json j;
  j["track"] = t.name;
  j["outcome"] = to_string(log.outcome);
  j["steps"] = log.steps.size();
  j["distance"] = round9(log.distance);
  j["final_clearance"] = round9(log.final_clearance);
  j["diagnostic"] = log.diagnostic;
  write_text(join(a.out_dir, "summary.json"), j.dump(1) + "\n");
  std::printf("outcome %s after %zu steps, distance %s m\n", to_string(log.outcome), log.steps.size(),
              fmt9(log.distance).c_str());
  if (!log.diagnostic.empty()) std::printf("diagnostic: %s\n", log.diagnostic.c_str());
  switch (log.outcome) {
    case Outcome::kLapComplete: return kOk;
    case Outcome::kCollision: return kUnsafe;
    default: return kInconclusive;
  }
}

struct VerifyArgs {
  std::string track, theta, out_dir;
  double dt = 0.02, horizon = 15.0, lookahead = 1.0, speed = 1.0, inflation = 0.15, deviation = 0.01;
  int max_laps = 5, depth = 8;
  double max_width = 0.0;
  bool relative = false, no_accelerate = false;
};

int verify(const VerifyArgs& a) {
  const Track t = load_track(a.track);
  const auto circuit = verification_circuit(build_circuit(t, a.deviation), a.lookahead);
  const HybridAutomaton aut = build_automaton(circuit, {a.speed, a.lookahead});
  Box3 theta = parse_box(a.theta);
  if (a.relative) {
    const CoupledState e = nominal_entry(aut);
    theta = {theta.x + Interval(e.x), theta.y + Interval(e.y), theta.theta + Interval(e.theta)};
  }
  ReachOptions o;
  o.dt = a.dt;
  o.horizon = a.horizon;
  o.max_laps = a.max_laps;
  SplitPolicy sp;
  sp.depth_cap = a.depth;
  sp.max_width = {a.max_width, a.max_width, a.max_width};
  sp.accelerate = !a.no_accelerate;
  sp.keep_results = !a.out_dir.empty();
  const PartitionReport rep = verify_with_partitions(aut, theta, make_unsafe_set(t.walls(), a.inflation), o, sp);

  std::printf("modes %zu, initial set %s\n", aut.modes.size(), box_text(theta).c_str());
  size_t halted = 0;
  for (const auto& p : rep.parts) {
    halted += p.halted_by_containment;
    std::printf("part %s depth %d: %s, %zu slabs%s%s\n", box_text(p.box).c_str(), p.depth, to_string(p.verdict),
                p.slabs, p.halted_by_containment ? ", halted by containment" : "",
                p.fixed_point ? (", fixed point at lap " + std::to_string(p.fixed_point->lap)).c_str() : "");
  }
  std::printf("verdict %s: %zu parts, %zu halted, %zu slabs\n", to_string(rep.verdict), rep.parts.size(), halted,
              rep.total_slabs);

  if (!a.out_dir.empty()) {
    ensure_dir(a.out_dir);
    Scene s = scene_from_track(t);
    add_circuit(s, circuit);
    std::string csv;
    for (size_t i = 0; i < rep.parts.size(); ++i) {
      if (!rep.parts[i].result) continue;
      add_reach(s, aut, *rep.parts[i].result);
      std::string part = slabs_to_csv(*rep.parts[i].result);
      if (!csv.empty()) part.erase(0, part.find('\n') + 1);
      csv += part;
      write_text(join(a.out_dir, "reach_" + std::to_string(i) + ".json"), export_reach(*rep.parts[i].result) + "\n");
    }
    if (csv.empty()) csv = slabs_to_csv(ReachResult{});
    write_text(join(a.out_dir, "slabs.csv"), csv);
    write_text(join(a.out_dir, "scene.json"), scene_to_json(s) + "\n");
    write_text(join(a.out_dir, "flowpipe.svg"), render_svg(s));
  }
  switch (rep.verdict) {
    case Verdict::kSafe:
    case Verdict::kBoundedSafe: return kOk;
    case Verdict::kUnsafe: return kUnsafe;
    default: return kInconclusive;
  }
}

struct ConsistencyArgs {
  std::string track;
  double range = 10.0, lookahead = 1.0, wheelbase = 0.325, deviation = 0.01;
  double min_distance = -1.0;
};

int consistency(const ConsistencyArgs& a) {
  const Track t = load_track(a.track);
  std::vector<std::vector<Point2>> axis;
  for (const auto& s : build_circuit(t, a.deviation)) axis.push_back({s.a, s.b});
  const TrackWidths w = measure_widths(axis, t.walls());
  const double d = a.min_distance >= 0.0 ? a.min_distance : 0.5 * w.min_width;
  const ConsistencyReport r = check_consistency_conditions(w, a.range, a.wheelbase, a.lookahead, d);
  std::printf("m %s  M %s  R %s  L %s  lookahead %s  D %s\n", fmt9(r.min_width).c_str(), fmt9(r.max_width).c_str(),
              fmt9(r.range).c_str(), fmt9(r.wheelbase).c_str(), fmt9(r.lookahead).c_str(),
              fmt9(r.min_distance).c_str());
  std::printf("R > M                     %s  margin %s\n", r.range_covers_width ? "holds" : "fails",
              fmt9(r.range_width_margin).c_str());
  std::printf("R > L + l + M/2           %s  margin %s\n", r.range_covers_lookahead ? "holds" : "fails",
              fmt9(r.range_lookahead_margin).c_str());
  std::printf("D^2 >= (L + l)^2 - m^2/4  %s  margin %s\n", r.clearance_ok ? "holds" : "fails",
              fmt9(r.clearance_margin).c_str());
  return r.all() ? kOk : kInconclusive;
}

struct PlotArgs {
  std::string in, out;
};

int plot(const PlotArgs& a) {
  const std::string text = read_text(a.in);
  Scene s;
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.contains("outer")) {
    const Track t = track_from_json(text);
    s = scene_from_track(t);
    try {
      add_circuit(s, build_circuit(t, 0.01));
    } catch (const TopologyError&) {
    }
  } else {
    s = scene_from_json(text);
  }
  write_text(a.out, render_svg(s));
  std::printf("wrote %s\n", a.out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reactive Voronoi planner: simulation and reachability"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-track", "Write a generated track");
  g->add_option("--kind", gen.kind, "rectangle, l-shape or triangle")->required();
  g->add_option("--out", gen.out, "Track file")->required();
  g->add_option("--width", gen.width, "Channel width");
  g->add_option("--length", gen.length, "Outer size along x (rectangle, l-shape)");
  g->add_option("--height", gen.height, "Outer size along y (rectangle, l-shape)");
  g->add_option("--side", gen.side, "Outer side (triangle)");
  g->add_option("--arm", gen.arm, "Outer arm thickness (l-shape)");

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "Closed-loop reactive simulation");
  s->add_option("--track", sim.track, "Track file")->required();
  s->add_option("--config", sim.config, "Scenario file (defaults when omitted)");
  s->add_option("--out-dir", sim.out_dir, "Directory for log.csv, summary.json, scene.json, trajectory.svg");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Flowpipe verification of the closed loop");
  v->add_option("--track", ver.track, "Track file")->required();
  v->add_option("--theta", ver.theta, "Initial set x0,x1,y0,y1,t0,t1 in the first mode frame")->required();
  v->add_option("--dt", ver.dt, "Time step");
  v->add_option("--horizon", ver.horizon, "Time horizon");
  v->add_option("--max-laps", ver.max_laps, "Lap budget");
  v->add_option("--lookahead", ver.lookahead, "Lookahead distance");
  v->add_option("--speed", ver.speed, "Speed");
  v->add_option("--inflation", ver.inflation, "Wall inflation radius");
  v->add_option("--max-width", ver.max_width, "Split parts wider than this before computing (0: off)");
  v->add_option("--depth", ver.depth, "Bisection depth cap");
  v->add_flag("--relative", ver.relative, "Read --theta as offsets from the nominal entry state");
  v->add_flag("--no-accelerate", ver.no_accelerate, "Disable halting by containment");
  v->add_option("--out-dir", ver.out_dir, "Directory for slabs.csv, reach_*.json, scene.json, flowpipe.svg");

  ConsistencyArgs con;
  auto* c = app.add_subcommand("consistency", "Check the local/global diagram agreement conditions");
  c->add_option("--track", con.track, "Track file")->required();
  c->add_option("--range", con.range, "Lidar range");
  c->add_option("--lookahead", con.lookahead, "Lookahead distance");
  c->add_option("--wheelbase", con.wheelbase, "Lidar to rear axle distance");
  c->add_option("--min-distance", con.min_distance, "Least lidar to wall distance (default: half the min width)");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Render a scene or track file to SVG");
  p->add_option("--in", pl.in, "scene.json or track file")->required();
  p->add_option("--out", pl.out, "SVG file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return gen_track(gen);
    if (*s) return simulate(sim);
    if (*v) return verify(ver);
    if (*c) return consistency(con);
    if (*p) return plot(pl);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kError;
}
