#include "rvp/interval.hpp"

#include <algorithm>

#include "rvp/errors.hpp"
#include "rvp/geometry.hpp"

namespace rvp {

namespace {

// libm sin/cos/exp/sqrt are within an ulp or so; two ulps of slack per bound.
Interval widen2(double l, double h) { return {down(down(l)), up(up(h))}; }

// True when some x0 + 2*pi*k lies in [lo, hi].
bool hits(double lo, double hi, double x0) {
  const double k = std::ceil((lo - x0) / (2.0 * kPi));
  return x0 + 2.0 * kPi * k <= hi;
}

}  // namespace

Interval operator*(const Interval& a, const Interval& b) {
  const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return widen(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.lo <= 0.0 && b.hi >= 0.0) throw InvalidState("interval division by an interval containing zero");
  const double p[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return widen(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}

Interval sqr(const Interval& a) {
  const double l = a.lo * a.lo, h = a.hi * a.hi;
  if (a.lo >= 0.0) return widen(l, h);
  if (a.hi <= 0.0) return widen(h, l);
  return {0.0, up(std::max(l, h))};
}

Interval sqrt(const Interval& a) {
  if (a.lo < 0.0) throw FlowDomainError("interval sqrt of a negative range");
  return {std::max(0.0, down(down(std::sqrt(a.lo)))), up(up(std::sqrt(a.hi)))};
}

Interval sin(const Interval& a) {
  if (a.width() >= 2.0 * kPi) return {-1.0, 1.0};
  double l = std::min(std::sin(a.lo), std::sin(a.hi));
  double h = std::max(std::sin(a.lo), std::sin(a.hi));
  if (hits(a.lo, a.hi, 0.5 * kPi)) h = 1.0;
  if (hits(a.lo, a.hi, -0.5 * kPi)) l = -1.0;
  const Interval w = widen2(l, h);
  return {std::max(-1.0, w.lo), std::min(1.0, w.hi)};
}

Interval cos(const Interval& a) {
  if (a.width() >= 2.0 * kPi) return {-1.0, 1.0};
  double l = std::min(std::cos(a.lo), std::cos(a.hi));
  double h = std::max(std::cos(a.lo), std::cos(a.hi));
  if (hits(a.lo, a.hi, 0.0)) h = 1.0;
  if (hits(a.lo, a.hi, kPi)) l = -1.0;
  const Interval w = widen2(l, h);
  return {std::max(-1.0, w.lo), std::min(1.0, w.hi)};
}

Interval exp(const Interval& a) {
  const Interval w = widen2(std::exp(a.lo), std::exp(a.hi));
  return {std::max(0.0, w.lo), w.hi};
}

Interval hull(const Interval& a, const Interval& b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

Interval intersect(const Interval& a, const Interval& b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

Mat3 identity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

IVec3 to_interval(const Vec3& v) { return {Interval(v[0]), Interval(v[1]), Interval(v[2])}; }

IMat3 to_interval(const Mat3& m) { return {to_interval(m[0]), to_interval(m[1]), to_interval(m[2])}; }

Vec3 mid(const IVec3& v) { return {v[0].mid(), v[1].mid(), v[2].mid()}; }

Mat3 mid(const IMat3& m) { return {mid(m[0]), mid(m[1]), mid(m[2])}; }

IVec3 operator+(const IVec3& a, const IVec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

IVec3 operator-(const IVec3& a, const IVec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

IVec3 operator*(const IMat3& m, const IVec3& v) {
  IVec3 out;
  for (int i = 0; i < 3; ++i) out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return out;
}

IMat3 operator*(const IMat3& a, const IMat3& b) {
  IMat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return out;
}

IMat3 operator+(const IMat3& a, const IMat3& b) {
  IMat3 out;
  for (int i = 0; i < 3; ++i) out[i] = a[i] + b[i];
  return out;
}

IMat3 operator-(const IMat3& a, const IMat3& b) {
  IMat3 out;
  for (int i = 0; i < 3; ++i) out[i] = a[i] - b[i];
  return out;
}

IMat3 scale(const Interval& s, const IMat3& m) {
  IMat3 out;
  for (int i = 0; i < 3; ++i) out[i] = scale(s, m[i]);
  return out;
}

IVec3 scale(const Interval& s, const IVec3& v) { return {s * v[0], s * v[1], s * v[2]}; }

IVec3 hull(const IVec3& a, const IVec3& b) { return {hull(a[0], b[0]), hull(a[1], b[1]), hull(a[2], b[2])}; }

bool contains(const IVec3& outer, const IVec3& inner) {
  return outer[0].contains(inner[0]) && outer[1].contains(inner[1]) && outer[2].contains(inner[2]);
}

Mat3 inverse(const Mat3& m) {
  const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
  double scale_m = 0.0;
  for (const auto& row : m)
    for (double v : row) scale_m = std::max(scale_m, std::abs(v));
  if (!(std::abs(det) > 1e-300) || std::abs(det) < 1e-14 * scale_m * scale_m * scale_m)
    throw InvalidState("inverse: singular matrix");
  const double inv = 1.0 / det;
  Mat3 out;
  out[0] = {c00 * inv, (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv, (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv};
  out[1] = {c01 * inv, (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv, (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv};
  out[2] = {c02 * inv, (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv, (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv};
  return out;
}

Series operator+(const Series& a, const Series& b) {
  Series out(a.order());
  for (size_t k = 0; k < a.c.size(); ++k) out.c[k] = a.c[k] + b.c[k];
  return out;
}

Series operator-(const Series& a, const Series& b) {
  Series out(a.order());
  for (size_t k = 0; k < a.c.size(); ++k) out.c[k] = a.c[k] - b.c[k];
  return out;
}

Series operator*(const Series& a, const Series& b) {
  Series out(a.order());
  for (size_t k = 0; k < a.c.size(); ++k) {
    Interval acc(0.0);
    for (size_t j = 0; j <= k; ++j) acc += a.c[j] * b.c[k - j];
    out.c[k] = acc;
  }
  return out;
}

Series operator*(const Interval& s, const Series& a) {
  Series out(a.order());
  for (size_t k = 0; k < a.c.size(); ++k) out.c[k] = s * a.c[k];
  return out;
}

void sin_cos(const Series& a, Series& s, Series& c) {
  const size_t n = a.order();
  s = Series(n, sin(a.c[0]));
  c = Series(n, cos(a.c[0]));
  for (size_t k = 1; k <= n; ++k) {
    Interval ds(0.0), dc(0.0);
    for (size_t j = 1; j <= k; ++j) {
      const Interval ja = Interval(static_cast<double>(j)) * a.c[j];
      ds += ja * c.c[k - j];
      dc += ja * s.c[k - j];
    }
    const Interval inv_k = Interval(1.0) / Interval(static_cast<double>(k));
    s.c[k] = ds * inv_k;
    c.c[k] = -(dc * inv_k);
  }
}

Series sqrt(const Series& a) {
  const size_t n = a.order();
  Series q(n, sqrt(a.c[0]));
  if (n == 0) return q;
  if (!(q.c[0].lo > 0.0)) throw FlowDomainError("series sqrt at zero");
  const Interval two_q0 = Interval(2.0) * q.c[0];
  for (size_t k = 1; k <= n; ++k) {
    Interval acc = a.c[k];
    for (size_t j = 1; j < k; ++j) acc -= q.c[j] * q.c[k - j];
    q.c[k] = acc / two_q0;
  }
  return q;
}

}  // namespace rvp
