#include "rvp/artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rvp/errors.hpp"
#include "rvp/numeric_format.hpp"

namespace rvp {

namespace {

std::string points_attr(const std::vector<Point2>& pts) {
  std::string out;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ' ';
    out += fmt9(pts[i].x) + "," + fmt9(-pts[i].y);
  }
  return out;
}

nlohmann::json to_json(const std::vector<Point2>& pts) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : pts) a.push_back({round9(p.x), round9(p.y)});
  return a;
}

nlohmann::json to_json(const std::vector<std::vector<Point2>>& rings) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rings) a.push_back(to_json(r));
  return a;
}

std::vector<Point2> points_from(const nlohmann::json& a) {
  std::vector<Point2> out;
  for (const auto& p : a) {
    if (!p.is_array() || p.size() != 2) throw InvalidArgument("scene: point must be [x, y]");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

std::vector<std::vector<Point2>> rings_from(const nlohmann::json& a) {
  std::vector<std::vector<Point2>> out;
  for (const auto& r : a) out.push_back(points_from(r));
  return out;
}

}  // namespace

Scene scene_from_track(const Track& t) {
  Scene s;
  s.walls.push_back(t.outer);
  if (!t.inner.empty()) s.walls.push_back(t.inner);
  return s;
}

void add_circuit(Scene& s, const std::vector<Segment>& circuit) {
  for (const auto& seg : circuit) s.voronoi.push_back({seg.a, seg.b});
}

void add_log(Scene& s, const SimulationLog& log) {
  if (log.steps.empty()) return;
  for (const auto& r : log.steps) {
    s.trajectory.push_back(r.state.position());
    s.waypoints.push_back(r.waypoint);
  }
  s.trajectory.push_back(log.final_state.position());
}

std::vector<Point2> slab_footprint(const HybridAutomaton& aut, const FlowpipeSlab& slab) {
  const Frame& f = aut.modes.at(static_cast<size_t>(slab.mode)).frame;
  const Box2 local{slab.box.x.lo, slab.box.x.hi, slab.box.y.lo, slab.box.y.hi};
  std::vector<Point2> out;
  for (const auto& c : local.corners()) out.push_back(f.to_world(c));
  return out;
}

void add_reach(Scene& s, const HybridAutomaton& aut, const ReachResult& r) {
  for (const auto& slab : r.slabs) s.boxes.push_back(slab_footprint(aut, slab));
}

std::string render_svg(const Scene& s) {
  double xlo = std::numeric_limits<double>::infinity(), ylo = xlo, xhi = -xlo, yhi = -xlo;
  auto grow = [&](const std::vector<Point2>& pts) {
    for (const auto& p : pts) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y);
      yhi = std::max(yhi, p.y);
    }
  };
  for (const auto& w : s.walls) grow(w);
  for (const auto& v : s.voronoi) grow(v);
  for (const auto& b : s.boxes) grow(b);
  grow(s.trajectory);
  grow(s.waypoints);
  if (!(xlo <= xhi)) xlo = ylo = 0.0, xhi = yhi = 1.0;
  const double pad = 0.05 * std::max({xhi - xlo, yhi - ylo, 1.0});
  const double w = xhi - xlo + 2.0 * pad, h = yhi - ylo + 2.0 * pad;
  const double stroke = 0.002 * std::max(w, h);

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt9(800.0) << "\" height=\""
    << fmt9(800.0 * h / w) << "\" viewBox=\"" << fmt9(xlo - pad) << " " << fmt9(-(yhi + pad)) << " " << fmt9(w) << " "
    << fmt9(h) << "\">\n";
  o << "<rect x=\"" << fmt9(xlo - pad) << "\" y=\"" << fmt9(-(yhi + pad)) << "\" width=\"" << fmt9(w)
    << "\" height=\"" << fmt9(h) << "\" fill=\"white\"/>\n";
  for (const auto& b : s.boxes)
    o << "<polygon class=\"slab\" points=\"" << points_attr(b)
      << "\" fill=\"#4a90d9\" fill-opacity=\"0.15\" stroke=\"#4a90d9\" stroke-width=\"" << fmt9(0.5 * stroke)
      << "\"/>\n";
  for (const auto& wl : s.walls)
    o << "<polygon class=\"wall\" points=\"" << points_attr(wl) << "\" fill=\"none\" stroke=\"black\" stroke-width=\""
      << fmt9(2.0 * stroke) << "\"/>\n";
  for (const auto& v : s.voronoi)
    o << "<polyline class=\"voronoi\" points=\"" << points_attr(v)
      << "\" fill=\"none\" stroke=\"#2e8b57\" stroke-width=\"" << fmt9(stroke) << "\"/>\n";
  for (const auto& p : s.waypoints)
    o << "<circle class=\"waypoint\" cx=\"" << fmt9(p.x) << "\" cy=\"" << fmt9(-p.y) << "\" r=\"" << fmt9(stroke)
      << "\" fill=\"#f0ad4e\"/>\n";
  if (!s.trajectory.empty())
    o << "<polyline class=\"trajectory\" points=\"" << points_attr(s.trajectory)
      << "\" fill=\"none\" stroke=\"#d9534f\" stroke-width=\"" << fmt9(stroke) << "\"/>\n";
  o << "</svg>\n";
  return o.str();
}

std::string scene_to_json(const Scene& s) {
  nlohmann::json j;
  j["walls"] = to_json(s.walls);
  j["voronoi"] = to_json(s.voronoi);
  j["trajectory"] = to_json(s.trajectory);
  j["waypoints"] = to_json(s.waypoints);
  j["boxes"] = to_json(s.boxes);
  return j.dump(1);
}

Scene scene_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_object()) throw InvalidArgument("scene: expected an object");
    Scene s;
    if (j.contains("walls")) s.walls = rings_from(j.at("walls"));
    if (j.contains("voronoi")) s.voronoi = rings_from(j.at("voronoi"));
    if (j.contains("trajectory")) s.trajectory = points_from(j.at("trajectory"));
    if (j.contains("waypoints")) s.waypoints = points_from(j.at("waypoints"));
    if (j.contains("boxes")) s.boxes = rings_from(j.at("boxes"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("scene: malformed JSON: ") + e.what());
  }
}

std::string slabs_to_csv(const ReachResult& r) {
  std::string out = "mode,lap,t0,t1,x_lo,x_hi,y_lo,y_hi,theta_lo,theta_hi\n";
  for (const auto& s : r.slabs) {
    out += std::to_string(s.mode) + "," + std::to_string(s.lap) + "," + fmt9(s.t0) + "," + fmt9(s.t1) + "," +
           fmt9(s.box.x.lo) + "," + fmt9(s.box.x.hi) + "," + fmt9(s.box.y.lo) + "," + fmt9(s.box.y.hi) + "," +
           fmt9(s.box.theta.lo) + "," + fmt9(s.box.theta.hi) + "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("cannot write " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rvp
