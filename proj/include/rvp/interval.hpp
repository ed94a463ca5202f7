#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace rvp {

/// Closed interval of reals. Every operation widens its result outward by one
/// ulp per bound, which absorbs the rounding of the round-to-nearest result.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double v) : lo(v), hi(v) {}  // NOLINT: implicit on purpose
  Interval(double l, double h) : lo(l), hi(h) {}

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  double rad() const { return 0.5 * (hi - lo); }
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  bool empty() const { return !(lo <= hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

inline double down(double v) { return std::nextafter(v, -std::numeric_limits<double>::infinity()); }
inline double up(double v) { return std::nextafter(v, std::numeric_limits<double>::infinity()); }
inline Interval widen(double l, double h) { return {down(l), up(h)}; }

inline Interval operator+(const Interval& a, const Interval& b) { return widen(a.lo + b.lo, a.hi + b.hi); }
inline Interval operator-(const Interval& a, const Interval& b) { return widen(a.lo - b.hi, a.hi - b.lo); }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);
inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }

Interval sqr(const Interval& a);
/// Throws FlowDomainError when the interval reaches below zero.
Interval sqrt(const Interval& a);
Interval sin(const Interval& a);
Interval cos(const Interval& a);
Interval exp(const Interval& a);

Interval hull(const Interval& a, const Interval& b);
/// Empty result has lo > hi.
Interval intersect(const Interval& a, const Interval& b);
/// Symmetric interval [-r, r].
inline Interval symmetric(double r) { return {-r, r}; }

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;
using IVec3 = std::array<Interval, 3>;
using IMat3 = std::array<IVec3, 3>;

Mat3 identity3();
IVec3 to_interval(const Vec3& v);
IMat3 to_interval(const Mat3& m);
Vec3 mid(const IVec3& v);
Mat3 mid(const IMat3& m);
IVec3 operator+(const IVec3& a, const IVec3& b);
IVec3 operator-(const IVec3& a, const IVec3& b);
IVec3 operator*(const IMat3& m, const IVec3& v);
IMat3 operator*(const IMat3& a, const IMat3& b);
IMat3 operator+(const IMat3& a, const IMat3& b);
IMat3 operator-(const IMat3& a, const IMat3& b);
IMat3 scale(const Interval& s, const IMat3& m);
IVec3 scale(const Interval& s, const IVec3& v);
IVec3 hull(const IVec3& a, const IVec3& b);
bool contains(const IVec3& outer, const IVec3& inner);
/// Plain floating-point inverse; throws InvalidState when singular.
Mat3 inverse(const Mat3& m);

/// Truncated power series with interval coefficients: c[k] is the k-th
/// Taylor coefficient (derivative divided by k!).
struct Series {
  std::vector<Interval> c;

  Series() = default;
  explicit Series(size_t order, const Interval& constant = Interval(0.0)) : c(order + 1, Interval(0.0)) {
    c[0] = constant;
  }
  size_t order() const { return c.size() - 1; }
};

Series operator+(const Series& a, const Series& b);
Series operator-(const Series& a, const Series& b);
Series operator*(const Series& a, const Series& b);
Series operator*(const Interval& s, const Series& a);
/// sin and cos of a series, computed together by the usual recurrence.
void sin_cos(const Series& a, Series& s, Series& c);
Series sqrt(const Series& a);

}  // namespace rvp
