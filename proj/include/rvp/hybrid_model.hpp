#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rvp/geometry.hpp"

namespace rvp {

/// Rear-axle state in the frame of the edge being tracked.
struct CoupledState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct FlowParams {
  double speed = 1.0;      ///< v
  double lookahead = 1.0;  ///< ell
};

/// Closed-loop field with the waypoint on the edge line at x + sqrt(ell^2 - y^2).
/// Throws FlowDomainError when |y| > ell.
CoupledState coupled_dynamics(const CoupledState& s, double speed, double lookahead);

struct Mode {
  int id = 0;
  Frame frame;              ///< origin at the edge start, x-axis along the edge
  double length = 0.0;
  FlowParams flow;
};

struct TransitionSpec {
  int from = 0;
  int to = 0;
  ConvexPolytope2 guard;   ///< over (x, y) in the from-frame
  Circle guard_disk;       ///< exact switching disk in the from-frame
  Frame from_frame;
  Frame to_frame;
  double turn = 0.0;       ///< to-frame rotation minus from-frame rotation, in (-pi, pi]
};

struct AutomatonOptions {
  int guard_faces = 16;
  double y_cap_fraction = 0.999;  ///< invariant |y| <= fraction * ell
};

struct HybridAutomaton {
  std::vector<Mode> modes;
  std::vector<TransitionSpec> transitions;
  std::vector<int> outgoing;  ///< transition index per mode, -1 for none
  bool closed = false;
  double y_cap = 0.0;

  const TransitionSpec* next(int mode) const {
    const int t = outgoing.at(static_cast<size_t>(mode));
    return t < 0 ? nullptr : &transitions[static_cast<size_t>(t)];
  }
};

/// One mode per segment of a closed chain; consecutive segments must share
/// endpoints (within 1e-6) and the last must end where the first starts.
HybridAutomaton build_automaton(const std::vector<Segment>& circuit, const FlowParams& flow,
                                const AutomatonOptions& options = {});

/// Same construction for an open chain; the last mode has no transition.
HybridAutomaton build_path_automaton(const std::vector<Segment>& path, const FlowParams& flow,
                                     const AutomatonOptions& options = {});

/// Rigid change of frame. Throws InvalidState when (x, y) is outside the guard.
CoupledState apply_reset(const CoupledState& s, const TransitionSpec& t);

/// State where the lookahead circle first reaches the start of mode 0 for a
/// vehicle centred on the preceding edge and aligned with it, in mode-0 coordinates.
CoupledState nominal_entry(const HybridAutomaton& aut);

Pose to_world(const HybridAutomaton& aut, int mode, const CoupledState& s);

/// JSON with modes (frame, length) and transitions (guard halfplanes, reset frames).
std::string export_automaton(const HybridAutomaton& aut);

struct HybridSample {
  double time = 0.0;
  int mode = 0;
  int lap = 0;
  CoupledState state;
};

struct HybridSimOptions {
  double sample_period = 0.02;
  int substeps = 20;  ///< RK4 steps per sample period
  double horizon = 15.0;
};

/// Reference execution: RK4 within a mode and an exact switch, located by
/// bisection, when (x, y) first enters the guard disk. Stops at the horizon
/// or when the state leaves the last mode's invariant.
std::vector<HybridSample> simulate_hybrid(const HybridAutomaton& aut, int mode, const CoupledState& start,
                                          const HybridSimOptions& options);

}  // namespace rvp
