#include "rvp/hybrid_model.hpp"

#include <cmath>

#include "json.hpp"
#include "rvp/errors.hpp"
#include "rvp/numeric_format.hpp"

namespace rvp {

CoupledState coupled_dynamics(const CoupledState& s, double speed, double lookahead) {
  const double rad = lookahead * lookahead - s.y * s.y;
  if (rad < 0.0) throw FlowDomainError("coupled dynamics: |y| exceeds the lookahead distance");
  const double k = 2.0 * speed / (lookahead * lookahead);
  const double sn = std::sin(s.theta), cs = std::cos(s.theta);
  return {speed * cs, speed * sn, k * (-std::sqrt(rad) * sn - s.y * cs)};
}

namespace {

HybridAutomaton build_chain(const std::vector<Segment>& chain, const FlowParams& flow, const AutomatonOptions& opt,
                            bool closed) {
  if (chain.empty()) throw InvalidArgument("automaton: empty chain");
  if (!(flow.speed > 0.0) || !(flow.lookahead > 0.0))
    throw InvalidArgument("automaton: speed and lookahead must be positive");
  if (!(opt.y_cap_fraction > 0.0 && opt.y_cap_fraction < 1.0))
    throw InvalidArgument("automaton: y cap fraction must lie in (0, 1)");
  constexpr double kJoinTol = 1e-6;
  for (size_t i = 0; i < chain.size(); ++i) {
    if (chain[i].length() < kMinSegmentLength) throw InvalidArgument("automaton: degenerate edge");
    const bool last = i + 1 == chain.size();
    if (last && !closed) break;
    const Segment& next = chain[last ? 0 : i + 1];
    if (distance(chain[i].b, next.a) > kJoinTol)
      throw InvalidArgument(last ? "automaton: circuit is not closed" : "automaton: edges do not share endpoints");
  }

  HybridAutomaton aut;
  aut.closed = closed;
  aut.y_cap = opt.y_cap_fraction * flow.lookahead;
  for (size_t i = 0; i < chain.size(); ++i)
    aut.modes.push_back({static_cast<int>(i), Frame::along(chain[i]), chain[i].length(), flow});
  aut.outgoing.assign(chain.size(), -1);
  const size_t n_trans = closed ? chain.size() : chain.size() - 1;
  for (size_t i = 0; i < n_trans; ++i) {
    const Mode& from = aut.modes[i];
    const Mode& to = aut.modes[(i + 1) % chain.size()];
    TransitionSpec t;
    t.from = from.id;
    t.to = to.id;
    t.from_frame = from.frame;
    t.to_frame = to.frame;
    t.turn = normalize_angle(to.frame.rotation - from.frame.rotation);
    t.guard_disk = {from.frame.to_local(to.frame.origin), flow.lookahead};
    t.guard = disk_guard_polytope(t.guard_disk, opt.guard_faces);
    aut.outgoing[i] = static_cast<int>(aut.transitions.size());
    aut.transitions.push_back(std::move(t));
  }
  return aut;
}

}  // namespace

HybridAutomaton build_automaton(const std::vector<Segment>& circuit, const FlowParams& flow,
                                const AutomatonOptions& options) {
  return build_chain(circuit, flow, options, true);
}

HybridAutomaton build_path_automaton(const std::vector<Segment>& path, const FlowParams& flow,
                                     const AutomatonOptions& options) {
  return build_chain(path, flow, options, false);
}

CoupledState apply_reset(const CoupledState& s, const TransitionSpec& t) {
  if (!t.guard.contains({s.x, s.y}, 1e-9)) throw InvalidState("reset: state is outside the guard");
  const Point2 p = t.to_frame.to_local(t.from_frame.to_world(Point2{s.x, s.y}));
  return {p.x, p.y, s.theta - t.turn};
}

CoupledState nominal_entry(const HybridAutomaton& aut) {
  const double ell = aut.modes.front().flow.lookahead;
  if (!aut.closed) return {-ell, 0.0, 0.0};
  const Mode& first = aut.modes.front();
  const TransitionSpec& in = aut.transitions.back();
  // Rear axle on the preceding edge line, ell before the start of mode 0.
  const Point2 dir_world{std::cos(in.from_frame.rotation), std::sin(in.from_frame.rotation)};
  const Point2 p = first.frame.to_local(first.frame.origin - ell * dir_world);
  return {p.x, p.y, -in.turn};
}

Pose to_world(const HybridAutomaton& aut, int mode, const CoupledState& s) {
  const Frame& f = aut.modes.at(static_cast<size_t>(mode)).frame;
  const Point2 p = f.to_world(Point2{s.x, s.y});
  return {p.x, p.y, normalize_angle(s.theta + f.rotation)};
}

std::string export_automaton(const HybridAutomaton& aut) {
  using nlohmann::json;
  json modes = json::array();
  for (const auto& m : aut.modes) {
    modes.push_back({{"id", m.id},
                     {"origin", {round9(m.frame.origin.x), round9(m.frame.origin.y)}},
                     {"rotation", round9(m.frame.rotation)},
                     {"length", round9(m.length)}});
  }
  json trans = json::array();
  for (const auto& t : aut.transitions) {
    json hs = json::array();
    for (const auto& h : t.guard.halfplanes) hs.push_back({round9(h.normal.x), round9(h.normal.y), round9(h.offset)});
    trans.push_back({{"from", t.from},
                     {"to", t.to},
                     {"guard", hs},
                     {"disk", {round9(t.guard_disk.center.x), round9(t.guard_disk.center.y), round9(t.guard_disk.radius)}},
                     {"turn", round9(t.turn)}});
  }
  json j;
  j["closed"] = aut.closed;
  j["speed"] = round9(aut.modes.front().flow.speed);
  j["lookahead"] = round9(aut.modes.front().flow.lookahead);
  j["modes"] = modes;
  j["transitions"] = trans;
  return j.dump(1);
}

namespace {

CoupledState rk4(const CoupledState& s, double h, const FlowParams& f) {
  auto add = [](const CoupledState& a, const CoupledState& d, double k) {
    return CoupledState{a.x + k * d.x, a.y + k * d.y, a.theta + k * d.theta};
  };
  const CoupledState k1 = coupled_dynamics(s, f.speed, f.lookahead);
  const CoupledState k2 = coupled_dynamics(add(s, k1, 0.5 * h), f.speed, f.lookahead);
  const CoupledState k3 = coupled_dynamics(add(s, k2, 0.5 * h), f.speed, f.lookahead);
  const CoupledState k4 = coupled_dynamics(add(s, k3, h), f.speed, f.lookahead);
  return {s.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.y + h / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          s.theta + h / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta)};
}

bool in_disk(const CoupledState& s, const Circle& c) {
  const double dx = s.x - c.center.x, dy = s.y - c.center.y;
  return dx * dx + dy * dy <= c.radius * c.radius;
}

}  // namespace

std::vector<HybridSample> simulate_hybrid(const HybridAutomaton& aut, int mode, const CoupledState& start,
                                          const HybridSimOptions& opt) {
  if (!(opt.sample_period > 0.0) || opt.substeps < 1 || !(opt.horizon >= 0.0))
    throw InvalidArgument("simulate_hybrid: bad options");
  std::vector<HybridSample> out;
  int lap = 0;
  CoupledState s = start;
  const double h = opt.sample_period / opt.substeps;

  // Takes every transition whose disk already holds the state.
  auto settle = [&]() {
    for (size_t guard = 0; guard <= aut.modes.size(); ++guard) {
      const TransitionSpec* t = aut.next(mode);
      if (!t || !in_disk(s, t->guard_disk)) return;
      s = apply_reset(s, *t);
      mode = t->to;
      if (mode == 0) ++lap;
    }
    throw InvalidState("simulate_hybrid: transitions do not settle");
  };
  auto outside_invariant = [&]() {
    const Mode& m = aut.modes[static_cast<size_t>(mode)];
    const double ell = m.flow.lookahead;
    return std::abs(s.y) > aut.y_cap || s.x > m.length + ell;
  };

  settle();
  const long n_samples = std::lround(std::floor(opt.horizon / opt.sample_period + 1e-9));
  out.push_back({0.0, mode, lap, s});
  for (long k = 1; k <= n_samples; ++k) {
    for (int i = 0; i < opt.substeps; ++i) {
      double remaining = h;
      while (remaining > 0.0) {
        const Mode& m = aut.modes[static_cast<size_t>(mode)];
        const TransitionSpec* t = aut.next(mode);
        const CoupledState next = rk4(s, remaining, m.flow);
        if (!t || !in_disk(next, t->guard_disk)) {
          s = next;
          break;
        }
        // Locate the first contact within what is left of the substep.
        double lo = 0.0, hi = remaining;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (in_disk(rk4(s, mid, m.flow), t->guard_disk) ? hi : lo) = mid;
        }
        s = rk4(s, hi, m.flow);
        settle();
        remaining -= hi;
      }
      if (outside_invariant()) return out;
    }
    out.push_back({static_cast<double>(k) * opt.sample_period, mode, lap, s});
  }
  return out;
}

}  // namespace rvp
