#pragma once

// Double-double arithmetic: a value is the unevaluated sum hi + lo with
// |lo| <= ulp(hi)/2.  Only the handful of operations needed for phase
// reduction of long trigonometric sums are provided.

#include <cmath>
#include <cstdint>

namespace rlab {

struct DDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DDouble() = default;
  constexpr DDouble(double h) : hi(h), lo(0.0) {}  // NOLINT implicit by intent
  constexpr DDouble(double h, double l) : hi(h), lo(l) {}

  double value() const { return hi + lo; }
};

namespace dd {

inline DDouble two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DDouble quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline DDouble two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

// 2*pi to ~106 bits.
inline constexpr DDouble kTwoPi{6.283185307179586232e+00, 2.449293598294706414e-16};

}  // namespace dd

inline DDouble operator-(DDouble a) { return {-a.hi, -a.lo}; }

inline DDouble operator+(DDouble a, DDouble b) {
  DDouble s = dd::two_sum(a.hi, b.hi);
  DDouble t = dd::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = dd::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return dd::quick_two_sum(s.hi, s.lo);
}

inline DDouble operator-(DDouble a, DDouble b) { return a + (-b); }

inline DDouble operator*(DDouble a, DDouble b) {
  DDouble p = dd::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return dd::quick_two_sum(p.hi, p.lo);
}

inline DDouble operator/(DDouble a, DDouble b) {
  double q1 = a.hi / b.hi;
  DDouble r = a - b * DDouble(q1);
  double q2 = r.hi / b.hi;
  r = r - b * DDouble(q2);
  double q3 = r.hi / b.hi;
  return dd::quick_two_sum(q1, q2) + DDouble(q3);
}

namespace dd {

// Correctly rounded sqrt followed by one Newton step carried in double-double.
inline DDouble sqrt(double a) {
  if (a <= 0.0) return {};
  double x = std::sqrt(a);
  DDouble resid = DDouble(a) - two_prod(x, x);
  return quick_two_sum(x, resid.hi / (2.0 * x));
}

// k-th root of a positive double, refined by one Newton step in double-double.
inline DDouble root(double a, int k) {
  if (k == 1) return {a};
  if (k == 2) return sqrt(a);
  double x = std::pow(a, 1.0 / k);
  DDouble xk{1.0};
  for (int i = 0; i < k; ++i) xk = xk * DDouble(x);
  DDouble resid = DDouble(a) - xk;
  double deriv = k * std::pow(x, k - 1);
  DDouble y = quick_two_sum(x, resid.hi / deriv);
  // Second step: the first only fixes the leading correction.
  DDouble yk{1.0};
  for (int i = 0; i < k; ++i) yk = yk * y;
  resid = DDouble(a) - yk;
  return y + DDouble(resid.hi / deriv);
}

// Signed fractional part in [-1/2, 1/2] of a cycle count.
inline DDouble frac_centered(DDouble t) {
  double r = std::nearbyint(t.hi);
  DDouble f = two_sum(t.hi - r, t.lo);
  if (f.hi > 0.5) f = f - DDouble(1.0);
  if (f.hi < -0.5) f = f + DDouble(1.0);
  return f;
}

// Angle in [-pi, pi] corresponding to cycles*x, reduced before leaving
// double-double so large arguments keep their fractional part.
inline double phase(DDouble cycles, double x) {
  DDouble t = cycles * DDouble(x);
  return (kTwoPi * frac_centered(t)).hi;
}

}  // namespace dd
}  // namespace rlab
