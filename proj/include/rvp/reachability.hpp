#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rvp/geometry.hpp"
#include "rvp/hybrid_model.hpp"
#include "rvp/interval.hpp"

namespace rvp {

struct Box3 {
  Interval x, y, theta;

  IVec3 vec() const { return {x, y, theta}; }
  static Box3 from(const IVec3& v) { return {v[0], v[1], v[2]}; }
  static Box3 around(const CoupledState& c, double hx, double hy, double ht) {
    return {{c.x - hx, c.x + hx}, {c.y - hy, c.y + hy}, {c.theta - ht, c.theta + ht}};
  }
  bool empty() const { return x.empty() || y.empty() || theta.empty(); }
  bool contains(const CoupledState& s, double tol = 0.0) const {
    return s.x >= x.lo - tol && s.x <= x.hi + tol && s.y >= y.lo - tol && s.y <= y.hi + tol &&
           s.theta >= theta.lo - tol && s.theta <= theta.hi + tol;
  }
};

/// Parses "x0,x1,y0,y1,t0,t1". Throws InvalidArgument on malformed input.
Box3 parse_box(const std::string& text);

/// {c + B r : r in [r]}; the working set representation of the engine.
struct Parallelotope {
  Vec3 c{};
  Mat3 B = identity3();
  IVec3 r{};

  static Parallelotope from_box(const Box3& b);
  Box3 hull() const;
  /// Sufficient test for other being a subset of this set.
  bool contains(const Parallelotope& other) const;
};

struct FlowpipeSlab {
  int mode = 0;
  int lap = 0;
  double t0 = 0.0;  ///< earliest time covered
  double t1 = 0.0;  ///< latest time covered
  Box3 box;
};

struct FixedPoint {
  int lap = 0;        ///< k with snapshot[k + 1] inside snapshot[k]
  double time = 0.0;  ///< earliest arrival of snapshot k + 1
};

enum class Termination { kHorizon, kMaxLaps, kFixedPoint, kPathEnd, kDivergence, kContained };

const char* to_string(Termination t);

/// Mode-entry set the engine propagated from.
struct CrossSection {
  int mode = 0;
  Parallelotope set;
};

struct ReachResult {
  std::vector<FlowpipeSlab> slabs;
  /// Snapshot 0 is the initial set; snapshot k is the set entering mode 0 on lap k.
  std::vector<Box3> lap_snapshots;
  std::optional<FixedPoint> fixed_point;
  bool safe = false;  ///< filled in by check_safety
  Termination termination = Termination::kHorizon;
  std::string diagnostic;
  std::vector<CrossSection> cross_sections;
};

struct ReachOptions {
  double dt = 0.02;
  double horizon = 15.0;
  int max_laps = 5;
  int taylor_order = 4;
  int branch_cap = 64;             ///< jump pieces one transition may merge
  bool stop_at_fixed_point = true;
  /// A lap set that escapes the previous one but fits inside it scaled by
  /// 1 + widening about its centre is replaced by that scaled set.
  double widening = 0.25;
  /// Certified mode-entry sets; entering one of them halts the computation.
  const std::vector<CrossSection>* certified = nullptr;
};

/// Sound enclosure of the time-dt flow of every point in b (single mode, no guards).
/// Throws FlowDomainError when the enclosure reaches |y| >= ell.
Box3 validated_step(const Box3& b, const FlowParams& flow, double dt);

ReachResult compute_flowpipe(const HybridAutomaton& aut, const Box3& initial, const ReachOptions& options);

/// Walls inflated by the vehicle radius, each as a convex polygon in the world frame.
struct UnsafeSet {
  std::vector<ConvexPolytope2> regions;
  double inflation = 0.0;
};

/// Each wall becomes the hull of two circumscribed 16-gons around its endpoints.
UnsafeSet make_unsafe_set(const std::vector<Segment>& walls, double inflation, int faces = 16);

struct SafetyReport {
  bool safe = true;
  int first_violation = -1;  ///< slab index
};

/// Slab boxes are carried to the world frame as rotated rectangles and tested
/// against every unsafe region. Also stores the verdict in r.safe.
SafetyReport check_safety(ReachResult& r, const HybridAutomaton& aut, const UnsafeSet& u);

/// Smallest k with snapshots[k + 1] inside snapshots[k], theta compared modulo 2 pi.
std::optional<int> detect_fixed_point(const std::vector<Box3>& snapshots);

enum class Verdict { kSafe, kBoundedSafe, kUnsafe, kInconclusive };

const char* to_string(Verdict v);

struct SplitPolicy {
  int depth_cap = 8;
  /// Parts wider than this in a dimension are split before any computation (<= 0: no cap).
  Vec3 max_width{0.0, 0.0, 0.0};
  bool accelerate = true;  ///< halt parts whose mode-entry set lies in a certified one
  bool keep_results = false;  ///< retain each leaf's full ReachResult
};

struct PartitionVerdict {
  Box3 box;
  int depth = 0;
  Verdict verdict = Verdict::kInconclusive;
  bool halted_by_containment = false;
  size_t slabs = 0;
  std::optional<FixedPoint> fixed_point;
  std::string diagnostic;
  std::optional<ReachResult> result;  ///< set when SplitPolicy::keep_results
};

struct PartitionReport {
  std::vector<PartitionVerdict> parts;  ///< ordered by processing
  Verdict verdict = Verdict::kInconclusive;
  size_t total_slabs = 0;
};

/// Bisects along the widest dimension (or the dimension straddling the first
/// guard) until each part is certified by its own fixed point or by containment
/// in an earlier certified part. Parts are processed front to back along the
/// track, so trailing parts meet each guard after the leading ones.
/// Containment compares states only: a halted part is covered by the certified
/// pipe up to a time shift.
PartitionReport verify_with_partitions(const HybridAutomaton& aut, const Box3& initial, const UnsafeSet& unsafe,
                                       const ReachOptions& options, const SplitPolicy& policy);

/// Dimension used to split a box straddling the first guard of mode 0, if any.
std::optional<int> guard_split_dimension(const HybridAutomaton& aut, const Box3& b);

/// JSON with slabs, snapshots, fixed point and verdict.
std::string export_reach(const ReachResult& r);

}  // namespace rvp
