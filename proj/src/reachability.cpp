#include "rvp/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rvp/errors.hpp"
#include "rvp/numeric_format.hpp"

namespace rvp {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kHorizon: return "horizon";
    case Termination::kMaxLaps: return "max_laps";
    case Termination::kFixedPoint: return "fixed_point";
    case Termination::kPathEnd: return "path_end";
    case Termination::kDivergence: return "divergence";
    case Termination::kContained: return "contained";
  }
  return "unknown";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kSafe: return "safe";
    case Verdict::kBoundedSafe: return "bounded_safe";
    case Verdict::kUnsafe: return "unsafe";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

Box3 parse_box(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (item.empty() || end == item.c_str() || *end != '\0' || !std::isfinite(d))
      throw InvalidArgument("box: malformed number '" + item + "'");
    v.push_back(d);
  }
  if (v.size() != 6) throw InvalidArgument("box: expected x0,x1,y0,y1,t0,t1");
  if (v[0] > v[1] || v[2] > v[3] || v[4] > v[5]) throw InvalidArgument("box: lower bound above upper bound");
  return {{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}};
}

Parallelotope Parallelotope::from_box(const Box3& b) {
  Parallelotope p;
  const IVec3 v = b.vec();
  for (int i = 0; i < 3; ++i) {
    p.c[i] = v[i].mid();
    // A small floor keeps the basis invertible for point sets.
    const double rad = std::max(up(v[i].hi - p.c[i]), up(p.c[i] - v[i].lo));
    p.B[i] = {0.0, 0.0, 0.0};
    p.B[i][i] = std::max(rad, 1e-12);
    p.r[i] = {-1.0, 1.0};
  }
  return p;
}

Box3 Parallelotope::hull() const { return Box3::from(to_interval(c) + to_interval(B) * r); }

bool Parallelotope::contains(const Parallelotope& o) const {
  Mat3 inv;
  try {
    inv = inverse(B);
  } catch (const InvalidState&) {
    return false;
  }
  // inv is approximate, so require the image to sit inside r shrunk by the residual.
  const IMat3 I_inv = to_interval(inv);
  const IMat3 res = I_inv * to_interval(B) - to_interval(identity3());
  double res_norm = 0.0;
  for (const auto& row : res) {
    double s = 0.0;
    for (const auto& e : row) s += e.mag();
    res_norm = std::max(res_norm, s);
  }
  if (res_norm >= 0.5) return false;
  const IVec3 img = I_inv * (to_interval(o.c) - to_interval(c)) + (I_inv * to_interval(o.B)) * o.r;
  // s = inv x + (I - inv B) s, hence |s - inv x| <= res_norm |s| and |s| <= |inv x| / (1 - res_norm).
  double smax = 0.0;
  for (const auto& e : img) smax = std::max(smax, e.mag());
  const double slack = res_norm * smax / (1.0 - res_norm);
  for (int i = 0; i < 3; ++i)
    if (!(img[i].lo - slack >= r[i].lo && img[i].hi + slack <= r[i].hi)) return false;
  return true;
}

namespace {

IVec3 field(const IVec3& s, const FlowParams& f) {
  const Interval ell2 = Interval(f.lookahead) * f.lookahead;
  const Interval k = Interval(2.0 * f.speed) / ell2;
  const Interval root = sqrt(ell2 - sqr(s[1]));
  const Interval sn = sin(s[2]), cs = cos(s[2]);
  return {Interval(f.speed) * cs, Interval(f.speed) * sn, -(k * (root * sn + s[1] * cs))};
}

IMat3 jacobian(const IVec3& s, const FlowParams& f) {
  const Interval ell2 = Interval(f.lookahead) * f.lookahead;
  const Interval k = Interval(2.0 * f.speed) / ell2;
  const Interval root = sqrt(ell2 - sqr(s[1]));
  if (!(root.lo > 0.0)) throw FlowDomainError("flow jacobian: |y| reaches the lookahead distance");
  const Interval sn = sin(s[2]), cs = cos(s[2]);
  const Interval v(f.speed);
  IMat3 J;
  J[0] = {Interval(0.0), Interval(0.0), -(v * sn)};
  J[1] = {Interval(0.0), Interval(0.0), v * cs};
  J[2] = {Interval(0.0), k * (s[1] / root * sn - cs), k * (s[1] * sn - root * cs)};
  return J;
}

Interval inflate(const Interval& a) {
  const double e = 0.05 * a.width() + 1e-12 * (1.0 + a.mag());
  return {a.lo - e, a.hi + e};
}

// Picard test: X + [0, dt] f(E) inside E bounds every solution from X on [0, dt].
IVec3 a_priori(const IVec3& X, const FlowParams& f, double dt) {
  const Interval h(0.0, dt);
  IVec3 E = X + scale(h, field(X, f));
  for (int it = 0; it < 40; ++it) {
    IVec3 trial;
    for (int i = 0; i < 3; ++i) trial[i] = inflate(E[i]);
    const IVec3 next = X + scale(h, field(trial, f));
    if (contains(trial, next)) return next;
    E = next;
  }
  throw FlowDomainError("no a priori enclosure; reduce the time step");
}

using Series3 = std::array<Series, 3>;

Series3 series_field(const Series3& u, const FlowParams& f) {
  const size_t n = u[0].order();
  const Interval ell2 = Interval(f.lookahead) * f.lookahead;
  const Interval k = Interval(2.0 * f.speed) / ell2;
  Series sn, cs;
  sin_cos(u[2], sn, cs);
  const Series root = sqrt(Series(n, ell2) - u[1] * u[1]);
  return {Interval(f.speed) * cs, Interval(f.speed) * sn, -k * (root * sn + u[1] * cs)};
}

// Taylor coefficients 0..order of the solution through every point of x0.
Series3 taylor(const IVec3& x0, const FlowParams& f, int order) {
  Series3 u;
  for (int i = 0; i < 3; ++i) u[i] = Series(static_cast<size_t>(order), x0[i]);
  for (int k = 0; k < order; ++k) {
    const Series3 F = series_field(u, f);
    const Interval inv = Interval(1.0) / Interval(static_cast<double>(k + 1));
    for (int i = 0; i < 3; ++i) u[i].c[static_cast<size_t>(k + 1)] = F[i].c[static_cast<size_t>(k)] * inv;
  }
  return u;
}

// Enclosure of phi_dt(c): Taylor polynomial at c plus a Lagrange remainder over
// the a priori box of c.
IVec3 center_enclosure(const Vec3& c, const FlowParams& f, double dt, int order) {
  const IVec3 ci = to_interval(c);
  const IVec3 Ec = a_priori(ci, f, dt);
  const Series3 uc = taylor(ci, f, order);
  const Series3 ue = taylor(Ec, f, order);
  const Interval h(dt);
  IVec3 out;
  for (int i = 0; i < 3; ++i) {
    Interval acc = ue[i].c[static_cast<size_t>(order)];
    for (int k = order - 1; k >= 0; --k) acc = acc * h + uc[i].c[static_cast<size_t>(k)];
    out[i] = acc;
  }
  return out;
}

IVec3 to_ivec(const Box3& b) { return b.vec(); }

// Normal coordinates z = (x, y / ell, y / ell + theta), where the linearized
// field is a damped rotation in the last two components.
struct NormalMap {
  double ell;

  IMat3 M() const {
    const Interval inv = Interval(1.0) / Interval(ell);
    return {IVec3{1.0, 0.0, 0.0}, IVec3{0.0, inv, 0.0}, IVec3{0.0, inv, 1.0}};
  }
  Mat3 M_inv() const { return {Vec3{1.0, 0.0, 0.0}, Vec3{0.0, ell, 0.0}, Vec3{0.0, -1.0, 1.0}}; }

  IVec3 box(const Parallelotope& P) const {
    const IMat3 m = M();
    return m * to_interval(P.c) + (m * to_interval(P.B)) * P.r;
  }
  IVec3 apply(const IVec3& v) const { return M() * v; }

  // Parallelotope whose image is the z-box.
  Parallelotope from_z(const IVec3& z) const {
    Parallelotope p;
    const Mat3 mi = M_inv();
    Vec3 zc{};
    Vec3 zr{};
    for (int i = 0; i < 3; ++i) {
      zc[i] = z[i].mid();
      zr[i] = std::max({up(z[i].hi - zc[i]), up(zc[i] - z[i].lo), 1e-12});
    }
    const IVec3 c = to_interval(mi) * to_interval(zc);
    for (int i = 0; i < 3; ++i) {
      p.c[i] = c[i].mid();
      for (int j = 0; j < 3; ++j) p.B[i][j] = mi[i][j] * zr[j];
    }
    // Absorb the rounding of the centre into r.
    const Mat3 inv = inverse(p.B);
    const IVec3 dc = to_interval(inv) * (c - to_interval(p.c));
    for (int i = 0; i < 3; ++i) p.r[i] = Interval(-1.0, 1.0) + symmetric(2.0 * dc[i].mag() + 1e-15);
    return p;
  }
};

// Gram-Schmidt on the columns of A, longest first; dependent columns are
// replaced by a completing unit vector.
Mat3 orthonormal_basis(const Mat3& A) {
  std::array<Vec3, 3> cols;
  for (int j = 0; j < 3; ++j) cols[j] = {A[0][j], A[1][j], A[2][j]};
  auto nrm = [](const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); };
  std::stable_sort(cols.begin(), cols.end(), [&](const Vec3& a, const Vec3& b) { return nrm(a) > nrm(b); });
  const double scale = std::max(nrm(cols[0]), 1e-300);
  std::array<Vec3, 3> q;
  for (int j = 0; j < 3; ++j) {
    Vec3 v = cols[j];
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) {
        const double d = v[0] * q[i][0] + v[1] * q[i][1] + v[2] * q[i][2];
        for (int k = 0; k < 3; ++k) v[k] -= d * q[i][k];
      }
    if (nrm(v) < 1e-9 * scale) {
      // Unit axis least aligned with the vectors already chosen.
      int best = 0;
      double best_proj = 1e300;
      for (int a = 0; a < 3; ++a) {
        double proj = 0.0;
        for (int i = 0; i < j; ++i) proj += q[i][a] * q[i][a];
        if (proj < best_proj) best_proj = proj, best = a;
      }
      v = {0.0, 0.0, 0.0};
      v[best] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i < j; ++i) {
          const double d = v[0] * q[i][0] + v[1] * q[i][1] + v[2] * q[i][2];
          for (int k = 0; k < 3; ++k) v[k] -= d * q[i][k];
        }
    }
    const double n = nrm(v);
    for (int k = 0; k < 3; ++k) q[j][k] = v[k] / n;
  }
  Mat3 Q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Q[i][j] = q[j][i];
  return Q;
}

constexpr double kMaxCondition = 8.0;

// Infinity-norm condition number; infinite when singular.
double condition_number(const Mat3& A) {
  Mat3 inv;
  try {
    inv = inverse(A);
  } catch (const InvalidState&) {
    return std::numeric_limits<double>::infinity();
  }
  auto norm_inf = [](const Mat3& m) {
    double n = 0.0;
    for (const auto& row : m) n = std::max(n, std::abs(row[0]) + std::abs(row[1]) + std::abs(row[2]));
    return n;
  };
  return norm_inf(A) * norm_inf(inv);
}

struct StepResult {
  Parallelotope next;
  IVec3 E;  ///< bounds every solution from the set over [0, dt]
};

// Mean-value (Lohner) step of the parallelotope.
StepResult lohner_step(const Parallelotope& P, const FlowParams& f, double dt, int order) {
  const NormalMap nm{f.lookahead};
  const IVec3 X = to_ivec(P.hull());
  const IVec3 E = a_priori(X, f, dt);
  const IMat3 Df = jacobian(E, f);
  const IMat3 I = to_interval(identity3());
  const Interval h(0.0, dt);
  IMat3 W = I + scale(h, Df);
  bool ok = false;
  for (int it = 0; it < 40 && !ok; ++it) {
    IMat3 trial;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trial[i][j] = inflate(W[i][j]);
    const IMat3 next = I + scale(h, Df * trial);
    ok = true;
    for (int i = 0; i < 3; ++i) ok = ok && contains(trial[i], next[i]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) W[i][j] = ok ? next[i][j] : hull(next[i][j], trial[i][j]);
  }
  if (!ok) throw FlowDomainError("no enclosure of the flow jacobian; reduce the time step");
  const IMat3 Dphi = I + scale(Interval(dt), Df * W);

  const IVec3 enc = center_enclosure(P.c, f, dt, order);
  StepResult out;
  out.E = E;
  out.next.c = mid(enc);
  const IMat3 J = to_interval(mid(Dphi));
  const IMat3 JB = J * to_interval(P.B);
  const IVec3 err = (enc - to_interval(out.next.c)) + (Dphi - J) * (to_interval(P.B) * P.r);
  // Keep the image basis while it is well conditioned in normal coordinates;
  // otherwise switch to one that is orthonormal there, where the linear part is
  // a damped rotation and boxes do not grow.
  const Mat3 image = mid(JB);
  if (condition_number(mid(nm.M() * to_interval(image))) <= kMaxCondition) {
    out.next.B = image;
  } else {
    const Mat3 Q = orthonormal_basis(mid(nm.M() * JB));
    out.next.B = mid(to_interval(nm.M_inv()) * to_interval(Q));
  }
  const Mat3 inv = inverse(out.next.B);
  const IMat3 I_inv = to_interval(inv);
  IVec3 v = (I_inv * JB) * P.r + I_inv * err;
  // inv is approximate: the true coordinates s satisfy |s - v| <= rho |s|.
  const IMat3 res = I_inv * to_interval(out.next.B) - I;
  double rho = 0.0;
  for (const auto& row : res) rho = std::max(rho, row[0].mag() + row[1].mag() + row[2].mag());
  if (rho >= 0.5) throw InvalidState("flowpipe: ill-conditioned set basis");
  double vmax = 0.0;
  for (const auto& e : v) vmax = std::max(vmax, e.mag());
  const double slack = rho * vmax / (1.0 - rho);
  for (int i = 0; i < 3; ++i) out.next.r[i] = v[i] + symmetric(slack);
  return out;
}

}  // namespace

Box3 validated_step(const Box3& b, const FlowParams& flow, double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw InvalidArgument("validated_step: dt must be non-negative");
  if (b.empty()) throw InvalidArgument("validated_step: empty box");
  if (dt == 0.0) return b;
  const StepResult s = lohner_step(Parallelotope::from_box(b), flow, dt, 4);
  const Box3 h = s.next.hull();
  // The a priori box is also an enclosure; keep the tighter bound per coordinate.
  return {intersect(h.x, s.E[0]), intersect(h.y, s.E[1]), intersect(h.theta, s.E[2])};
}

namespace {

// Reset of a from-frame set: the image of a parallelotope under the rigid
// change of frame is again a parallelotope.
Parallelotope reset_set(const Parallelotope& src, const TransitionSpec& t) {
  const double phi = t.to_frame.rotation - t.from_frame.rotation;
  const double cs = std::cos(phi), sn = std::sin(phi);
  // to-frame coordinates: R(-phi) (p - o) with o the to-origin in the from-frame.
  const Point2 o = t.from_frame.to_local(t.to_frame.origin);
  const Mat3 A{Vec3{cs, sn, 0.0}, Vec3{-sn, cs, 0.0}, Vec3{0.0, 0.0, 1.0}};
  const IMat3 Ai = to_interval(A);
  const IVec3 shift{Interval(o.x), Interval(o.y), Interval(t.turn)};
  IVec3 offset = Ai * (to_interval(src.c) - IVec3{Interval(o.x), Interval(o.y), Interval(0.0)});
  offset[2] = Interval(src.c[2]) - shift[2];
  Parallelotope p;
  p.c = mid(offset);
  const IMat3 AB = Ai * to_interval(src.B);
  p.B = mid(AB);
  const Mat3 inv = inverse(p.B);
  const IMat3 I_inv = to_interval(inv);
  const IVec3 err = (offset - to_interval(p.c)) + (AB - to_interval(p.B)) * src.r;
  const IVec3 dr = I_inv * err;
  for (int i = 0; i < 3; ++i) p.r[i] = src.r[i] + symmetric(2.0 * dr[i].mag() + 1e-15);
  return p;
}

double volume(const Parallelotope& p) {
  const Mat3& B = p.B;
  const double det = B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1]) -
                     B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0]) +
                     B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]);
  return std::abs(det) * p.r[0].width() * p.r[1].width() * p.r[2].width();
}

struct Work {
  int mode = 0;
  Parallelotope set;
  double ta = 0.0, tb = 0.0;  ///< window of entry times
  int lap = 0;
};

struct VisitOut {
  bool jumped = false;
  IVec3 jump_z{};  ///< hull in normal coordinates
  IVec3 jump_s{};  ///< hull in state coordinates
  double ta = std::numeric_limits<double>::infinity();
  double tb = -std::numeric_limits<double>::infinity();
  Termination reason = Termination::kHorizon;
};

// x range of points on the left arc of the guard circle with |y - cy| in dy.
Interval left_arc_x(const Circle& c, const Interval& dy) {
  const double ell = c.radius;
  const double dmin = dy.contains(0.0) ? 0.0 : std::min(std::abs(dy.lo), std::abs(dy.hi));
  const double dmax = std::min(ell, dy.mag());
  const Interval e2 = Interval(ell) * ell;
  const Interval near = sqrt(Interval(std::max(0.0, (e2 - sqr(Interval(dmin))).lo), (e2 - sqr(Interval(dmin))).hi));
  const Interval far_arg = e2 - sqr(Interval(dmax));
  const Interval far = sqrt(Interval(std::max(0.0, far_arg.lo), std::max(0.0, far_arg.hi)));
  constexpr double kPad = 1e-9;
  return {(Interval(c.center.x) - near).lo - kPad, (Interval(c.center.x) - far).hi + kPad};
}

void add_jump(VisitOut& out, const IVec3& zpiece, const IVec3& spiece, double ta, double tb, int& pieces, int cap) {
  out.jump_z = out.jumped ? hull(out.jump_z, zpiece) : zpiece;
  out.jump_s = out.jumped ? hull(out.jump_s, spiece) : spiece;
  out.jumped = true;
  out.ta = std::min(out.ta, ta);
  out.tb = std::max(out.tb, tb);
  if (++pieces > cap)
    throw ResourceError("flowpipe: a transition merged more than " + std::to_string(cap) +
                        " jump pieces; refine the initial set");
}

VisitOut visit_mode(const HybridAutomaton& aut, const Work& w, const ReachOptions& opt,
                    std::vector<FlowpipeSlab>& slabs) {
  const Mode& m = aut.modes[static_cast<size_t>(w.mode)];
  const TransitionSpec* t = aut.next(w.mode);
  const NormalMap nm{m.flow.lookahead};
  const IMat3 M = nm.M();
  const double ell = m.flow.lookahead;
  VisitOut out;
  int pieces = 0;
  Parallelotope P = w.set;

  for (long k = 0;; ++k) {
    const double t_lo = w.ta + static_cast<double>(k) * opt.dt;
    if (t_lo > opt.horizon) {
      out.reason = Termination::kHorizon;
      return out;
    }
    IVec3 Xs = to_ivec(P.hull());
    IVec3 Xz = nm.box(P);
    Xs[1] = intersect(Xs[1], Interval(ell) * Xz[1]);
    if (Xs[1].mag() > aut.y_cap)
      throw FlowDomainError("flowpipe: reach set leaves |y| <= " + fmt9(aut.y_cap) + " in mode " +
                            std::to_string(w.mode));
    if (t && k == 0) {
      // Entry states already inside the disk switch at once.
      const auto in = intersect_box(Box2{Xs[0].lo, Xs[0].hi, Xs[1].lo, Xs[1].hi}, t->guard);
      if (in) {
        IVec3 z = Xz, sb = Xs;
        z[0] = sb[0] = intersect(z[0], Interval(in->xlo, in->xhi));
        sb[1] = intersect(sb[1], Interval(in->ylo, in->yhi));
        z[1] = intersect(z[1], sb[1] / Interval(ell));
        add_jump(out, z, sb, w.ta, w.tb, pieces, opt.branch_cap);
      }
    }

    // Only states left of the disk are still in this mode.
    double xmax = std::numeric_limits<double>::infinity();
    if (t) {
      const Interval dy = Xs[1] - Interval(t->guard_disk.center.y);
      if (dy.mag() < ell) xmax = left_arc_x(t->guard_disk, dy).hi;
    } else {
      xmax = m.length + ell;
    }
    Xs[0].hi = std::min(Xs[0].hi, xmax);
    Xz[0].hi = std::min(Xz[0].hi, xmax);
    if (Xs[0].empty()) {
      out.reason = t ? Termination::kHorizon : Termination::kPathEnd;
      return out;
    }

    const StepResult st = lohner_step(P, m.flow, opt.dt, opt.taylor_order);
    const IVec3 fE = field(st.E, m.flow);
    const Interval h(0.0, opt.dt);
    IVec3 ts = Xs + scale(h, fE);
    for (int i = 0; i < 3; ++i) ts[i] = intersect(ts[i], st.E[i]);
    IVec3 tz = Xz + scale(h, M * fE);
    ts[1] = intersect(ts[1], Interval(ell) * tz[1]);
    ts[2] = intersect(ts[2], tz[2] - tz[1]);
    tz[1] = intersect(tz[1], ts[1] / Interval(ell));
    tz[2] = intersect(tz[2], ts[2] + tz[1]);
    const double t_hi = w.tb + static_cast<double>(k + 1) * opt.dt;
    slabs.push_back({w.mode, w.lap, t_lo, t_hi, Box3::from(ts)});

    if (t) {
      const auto in = intersect_box(Box2{ts[0].lo, ts[0].hi, ts[1].lo, ts[1].hi}, t->guard);
      if (in) {
        const Interval dy = Interval(in->ylo, in->yhi) - Interval(t->guard_disk.center.y);
        const Interval jx = intersect(Interval(in->xlo, in->xhi), left_arc_x(t->guard_disk, dy));
        if (!jx.empty()) {
          IVec3 z = tz, sb = ts;
          z[0] = sb[0] = intersect(z[0], jx);
          sb[1] = intersect(sb[1], Interval(in->ylo, in->yhi));
          z[1] = intersect(z[1], sb[1] / Interval(ell));
          z[2] = intersect(z[2], z[1] + sb[2]);
          sb[2] = intersect(sb[2], z[2] - z[1]);
          const bool any = !Box3::from(z).empty() && !Box3::from(sb).empty();
          if (any) add_jump(out, z, sb, t_lo, t_hi, pieces, opt.branch_cap);
        }
      }
    }

    P = st.next;
  }
}

}  // namespace

ReachResult compute_flowpipe(const HybridAutomaton& aut, const Box3& initial, const ReachOptions& opt) {
  if (aut.modes.empty()) throw InvalidArgument("flowpipe: empty automaton");
  if (!(opt.dt > 0.0) || !std::isfinite(opt.dt)) throw InvalidArgument("flowpipe: dt must be positive");
  if (!(opt.horizon >= 0.0) || !std::isfinite(opt.horizon)) throw InvalidArgument("flowpipe: bad horizon");
  if (opt.max_laps < 1 || opt.taylor_order < 1 || opt.branch_cap < 1 || !(opt.widening >= 0.0))
    throw InvalidArgument("flowpipe: max_laps, taylor_order and branch_cap must be positive, widening non-negative");
  if (initial.empty()) throw InvalidArgument("flowpipe: empty initial set");

  ReachResult res;
  Work w{0, Parallelotope::from_box(initial), 0.0, 0.0, 0};
  res.lap_snapshots.push_back(initial);
  res.cross_sections.push_back({0, w.set});
  std::vector<Parallelotope> lap_sets{w.set};
  try {
    for (;;) {
      const VisitOut v = visit_mode(aut, w, opt, res.slabs);
      if (!v.jumped) {
        res.termination = v.reason;
        break;
      }
      const TransitionSpec& t = *aut.next(w.mode);
      const NormalMap nm{aut.modes[static_cast<size_t>(w.mode)].flow.lookahead};
      // Whichever hull gives the smaller set.
      const Parallelotope pz = nm.from_z(v.jump_z), ps = Parallelotope::from_box(Box3::from(v.jump_s));
      const Parallelotope& src = volume(pz) <= volume(ps) ? pz : ps;
      Work next{t.to, reset_set(src, t), v.ta, v.tb, w.lap + (t.to == 0 ? 1 : 0)};
      if (next.ta > opt.horizon) {
        res.termination = Termination::kHorizon;
        break;
      }
      res.cross_sections.push_back({next.mode, next.set});
      if (next.mode == 0) {
        const Parallelotope& prev = lap_sets.back();
        if (!res.fixed_point && next.lap >= 2 && opt.widening > 0.0 && !prev.contains(next.set)) {
          Parallelotope wide = prev;
          for (auto& ri : wide.r) ri = Interval(ri.mid()) + Interval(1.0 + opt.widening) * (ri - Interval(ri.mid()));
          if (wide.contains(next.set)) next.set = wide;
        }
        res.lap_snapshots.push_back(next.set.hull());
        lap_sets.push_back(next.set);
        const size_t k = lap_sets.size() - 2;
        if (!res.fixed_point && lap_sets[k].contains(next.set)) {
          res.fixed_point = FixedPoint{static_cast<int>(k), next.ta};
          if (opt.stop_at_fixed_point) {
            res.termination = Termination::kFixedPoint;
            break;
          }
        }
        if (next.lap >= opt.max_laps) {
          res.termination = Termination::kMaxLaps;
          break;
        }
      }
      if (opt.certified) {
        const bool inside = std::any_of(opt.certified->begin(), opt.certified->end(), [&](const CrossSection& cs) {
          return cs.mode == next.mode && cs.set.contains(next.set);
        });
        if (inside) {
          res.termination = Termination::kContained;
          break;
        }
      }
      w = next;
    }
  } catch (const FlowDomainError& e) {
    res.termination = Termination::kDivergence;
    res.diagnostic = e.what();
  } catch (const InvalidState& e) {
    res.termination = Termination::kDivergence;
    res.diagnostic = e.what();
  }
  return res;
}


namespace {

Polygon convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  Polygon h(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

Box2 polygon_bounds(const Polygon& poly) {
  Box2 b{poly[0].x, poly[0].x, poly[0].y, poly[0].y};
  for (const auto& p : poly) {
    b.xlo = std::min(b.xlo, p.x);
    b.xhi = std::max(b.xhi, p.x);
    b.ylo = std::min(b.ylo, p.y);
    b.yhi = std::max(b.yhi, p.y);
  }
  return b;
}

bool boxes_overlap(const Box2& a, const Box2& b) {
  return a.xlo <= b.xhi && b.xlo <= a.xhi && a.ylo <= b.yhi && b.ylo <= a.yhi;
}

}  // namespace

UnsafeSet make_unsafe_set(const std::vector<Segment>& walls, double inflation, int faces) {
  if (!(inflation >= 0.0) || faces < 3) throw InvalidArgument("unsafe set: bad inflation or face count");
  UnsafeSet u;
  u.inflation = inflation;
  const double R = inflation / std::cos(kPi / faces) * (1.0 + 1e-12) + 1e-12;
  for (const auto& w : walls) {
    std::vector<Point2> pts;
    for (int i = 0; i < faces; ++i) {
      const double a = 2.0 * kPi * (i + 0.5) / faces;
      const Point2 d{R * std::cos(a), R * std::sin(a)};
      pts.push_back(w.a + d);
      pts.push_back(w.b + d);
    }
    const Polygon hull = convex_hull(pts);
    ConvexPolytope2 poly;
    for (size_t i = 0; i < hull.size(); ++i) {
      const Point2 p = hull[i], q = hull[(i + 1) % hull.size()];
      const Point2 e = q - p;
      const double len = norm(e);
      if (len <= 0.0) continue;
      const Point2 n{e.y / len, -e.x / len};
      poly.halfplanes.push_back({n, dot(n, p) + 1e-12});
    }
    u.regions.push_back(std::move(poly));
  }
  return u;
}

SafetyReport check_safety(ReachResult& r, const HybridAutomaton& aut, const UnsafeSet& u) {
  std::vector<Box2> region_bounds;
  for (const auto& reg : u.regions) {
    // Bounds from the vertices of the halfplane ring.
    Polygon big{{-1e9, -1e9}, {1e9, -1e9}, {1e9, 1e9}, {-1e9, 1e9}};
    const Polygon ring = clip_polygon(big, reg);
    region_bounds.push_back(ring.empty() ? Box2{1, 0, 1, 0} : polygon_bounds(ring));
  }
  SafetyReport rep;
  for (size_t i = 0; i < r.slabs.size() && rep.safe; ++i) {
    const FlowpipeSlab& s = r.slabs[i];
    const Frame& f = aut.modes.at(static_cast<size_t>(s.mode)).frame;
    constexpr double kPad = 1e-9;
    const Box2 local{s.box.x.lo - kPad, s.box.x.hi + kPad, s.box.y.lo - kPad, s.box.y.hi + kPad};
    Polygon rect;
    for (const auto& c : local.corners()) rect.push_back(f.to_world(c));
    const Box2 rb = polygon_bounds(rect);
    for (size_t j = 0; j < u.regions.size(); ++j) {
      if (!boxes_overlap(rb, region_bounds[j])) continue;
      if (!clip_polygon(rect, u.regions[j]).empty()) {
        rep.safe = false;
        rep.first_violation = static_cast<int>(i);
        break;
      }
    }
  }
  r.safe = rep.safe;
  return rep;
}

std::optional<int> detect_fixed_point(const std::vector<Box3>& snaps) {
  for (size_t k = 0; k + 1 < snaps.size(); ++k) {
    const Box3& outer = snaps[k];
    Box3 inner = snaps[k + 1];
    const double turns = std::round((outer.theta.mid() - inner.theta.mid()) / (2.0 * kPi));
    inner.theta = {inner.theta.lo + 2.0 * kPi * turns, inner.theta.hi + 2.0 * kPi * turns};
    if (outer.x.contains(inner.x) && outer.y.contains(inner.y) && outer.theta.contains(inner.theta))
      return static_cast<int>(k);
  }
  return std::nullopt;
}

std::optional<int> guard_split_dimension(const HybridAutomaton& aut, const Box3& b) {
  const TransitionSpec* t = aut.next(0);
  if (!t) return std::nullopt;
  const Box2 xy{b.x.lo, b.x.hi, b.y.lo, b.y.hi};
  if (!intersect_box(xy, t->guard)) return std::nullopt;
  bool all_inside = true;
  for (const auto& c : xy.corners()) all_inside = all_inside && t->guard.contains(c);
  if (all_inside) return std::nullopt;
  return 0;
}

namespace {

std::pair<Box3, Box3> bisect(const Box3& b, int dim) {
  IVec3 lo = b.vec(), hi = b.vec();
  const double m = lo[static_cast<size_t>(dim)].mid();
  lo[static_cast<size_t>(dim)].hi = m;
  hi[static_cast<size_t>(dim)].lo = m;
  return {Box3::from(lo), Box3::from(hi)};
}

int widest(const Box3& b) {
  const IVec3 v = b.vec();
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (v[static_cast<size_t>(i)].width() > v[static_cast<size_t>(best)].width()) best = i;
  return best;
}

struct Item {
  Box3 box;
  int depth = 0;
};

void presplit(const Box3& b, const Vec3& cap, int depth, std::vector<Item>& out) {
  const IVec3 v = b.vec();
  for (int i = 0; i < 3; ++i) {
    if (cap[static_cast<size_t>(i)] > 0.0 && v[static_cast<size_t>(i)].width() > cap[static_cast<size_t>(i)] * (1.0 + 1e-9)) {
      const auto [a, c] = bisect(b, i);
      presplit(a, cap, depth + 1, out);
      presplit(c, cap, depth + 1, out);
      return;
    }
  }
  out.push_back({b, depth});
}

// Leading parts first along the x axis of mode 0.
void order_front_to_back(std::vector<Item>& items) {
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.box.x.mid() > b.box.x.mid(); });
}

}  // namespace

PartitionReport verify_with_partitions(const HybridAutomaton& aut, const Box3& initial, const UnsafeSet& unsafe,
                                       const ReachOptions& options, const SplitPolicy& policy) {
  if (policy.depth_cap < 0) throw InvalidArgument("partitions: negative depth cap");
  std::vector<Item> start;
  presplit(initial, policy.max_width, 0, start);
  order_front_to_back(start);
  std::deque<Item> queue(start.begin(), start.end());
  std::vector<CrossSection> certified;
  PartitionReport rep;

  while (!queue.empty()) {
    const Item item = queue.front();
    queue.pop_front();
    ReachOptions o = options;
    o.certified = policy.accelerate ? &certified : nullptr;
    PartitionVerdict pv;
    pv.box = item.box;
    pv.depth = item.depth;
    bool needs_split = false;
    try {
      ReachResult r = compute_flowpipe(aut, item.box, o);
      const SafetyReport sr = check_safety(r, aut, unsafe);
      pv.slabs = r.slabs.size();
      pv.fixed_point = r.fixed_point;
      pv.diagnostic = r.diagnostic;
      rep.total_slabs += r.slabs.size();
      const bool closed_ok = r.termination == Termination::kFixedPoint || r.termination == Termination::kContained ||
                             r.fixed_point.has_value();
      if (!sr.safe) {
        pv.verdict = Verdict::kUnsafe;
        pv.diagnostic = "reach set meets an inflated wall (slab " + std::to_string(sr.first_violation) + ")";
        needs_split = true;
      } else if (r.termination == Termination::kDivergence) {
        pv.verdict = Verdict::kInconclusive;
        needs_split = true;
      } else if (closed_ok) {
        pv.verdict = Verdict::kSafe;
        pv.halted_by_containment = r.termination == Termination::kContained;
        certified.insert(certified.end(), r.cross_sections.begin(), r.cross_sections.end());
      } else {
        pv.verdict = aut.closed ? Verdict::kBoundedSafe : Verdict::kSafe;
        if (aut.closed) pv.diagnostic = "no lap fixed point within the lap budget or horizon";
      }
      if (policy.keep_results) pv.result = std::move(r);
    } catch (const ResourceError& e) {
      pv.verdict = Verdict::kInconclusive;
      pv.diagnostic = e.what();
      needs_split = true;
    }
    if (needs_split && item.depth < policy.depth_cap) {
      const int dim = guard_split_dimension(aut, item.box).value_or(widest(item.box));
      const auto [a, b] = bisect(item.box, dim);
      std::vector<Item> kids{{a, item.depth + 1}, {b, item.depth + 1}};
      order_front_to_back(kids);
      queue.push_front(kids[1]);
      queue.push_front(kids[0]);
      continue;
    }
    rep.parts.push_back(pv);
  }

  auto any = [&](Verdict v) {
    return std::any_of(rep.parts.begin(), rep.parts.end(), [&](const PartitionVerdict& p) { return p.verdict == v; });
  };
  if (any(Verdict::kUnsafe)) rep.verdict = Verdict::kUnsafe;
  else if (any(Verdict::kInconclusive)) rep.verdict = Verdict::kInconclusive;
  else if (any(Verdict::kBoundedSafe)) rep.verdict = Verdict::kBoundedSafe;
  else rep.verdict = Verdict::kSafe;
  return rep;
}

std::string export_reach(const ReachResult& r) {
  using nlohmann::json;
  auto box = [](const Box3& b) {
    return json::array({round9(b.x.lo), round9(b.x.hi), round9(b.y.lo), round9(b.y.hi), round9(b.theta.lo),
                        round9(b.theta.hi)});
  };
  json slabs = json::array();
  for (const auto& s : r.slabs)
    slabs.push_back({{"mode", s.mode}, {"lap", s.lap}, {"t0", round9(s.t0)}, {"t1", round9(s.t1)}, {"box", box(s.box)}});
  json snaps = json::array();
  for (const auto& b : r.lap_snapshots) snaps.push_back(box(b));
  json j;
  j["termination"] = to_string(r.termination);
  j["safe"] = r.safe;
  j["diagnostic"] = r.diagnostic;
  j["fixed_point"] = r.fixed_point ? json{{"lap", r.fixed_point->lap}, {"time", round9(r.fixed_point->time)}} : json();
  j["lap_snapshots"] = snaps;
  j["slabs"] = slabs;
  return j.dump(1);
}

}  // namespace rvp
