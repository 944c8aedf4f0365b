#pragma once

#include <cmath>
#include <compare>
#include <ostream>

namespace atomgw::numerics {

/*!
  Unevaluated sum of two doubles (hi + lo, |lo| <= ulp(hi)/2), giving roughly
  32 significant digits.

  Interferometer phases reach 1e17 rad while the observable sits near 1e-4 rad;
  event times near 100 s must be resolved to 1e-20 s. Both need more than the
  53-bit mantissa of a double. Built on the error-free transformations of
  Knuth (two-sum) and Dekker (two-product via fma).
*/
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double value) : hi(value) {}  // NOLINT(google-explicit-constructor)
  constexpr DoubleDouble(double high, double low) : hi(high), lo(low) {}

  constexpr explicit operator double() const { return hi + lo; }

  static DoubleDouble two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
  }

  static DoubleDouble quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
  }

  static DoubleDouble two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
  }

  DoubleDouble& operator+=(const DoubleDouble& rhs) {
    DoubleDouble s = two_sum(hi, rhs.hi);
    const DoubleDouble t = two_sum(lo, rhs.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    *this = quick_two_sum(s.hi, s.lo);
    return *this;
  }

  DoubleDouble& operator-=(const DoubleDouble& rhs) { return *this += -rhs; }

  DoubleDouble& operator*=(const DoubleDouble& rhs) {
    DoubleDouble p = two_prod(hi, rhs.hi);
    p.lo += hi * rhs.lo + lo * rhs.hi;
    *this = quick_two_sum(p.hi, p.lo);
    return *this;
  }

  DoubleDouble& operator/=(const DoubleDouble& rhs) {
    const double q1 = hi / rhs.hi;
    DoubleDouble r = *this - rhs * DoubleDouble(q1);
    const double q2 = r.hi / rhs.hi;
    r -= rhs * DoubleDouble(q2);
    const double q3 = r.hi / rhs.hi;
    DoubleDouble q = quick_two_sum(q1, q2);
    q += DoubleDouble(q3);
    *this = q;
    return *this;
  }

  constexpr DoubleDouble operator-() const { return {-hi, -lo}; }

  friend DoubleDouble operator+(DoubleDouble a, const DoubleDouble& b) { return a += b; }
  friend DoubleDouble operator-(DoubleDouble a, const DoubleDouble& b) { return a -= b; }
  friend DoubleDouble operator*(DoubleDouble a, const DoubleDouble& b) { return a *= b; }
  friend DoubleDouble operator/(DoubleDouble a, const DoubleDouble& b) { return a /= b; }

  friend constexpr bool operator==(const DoubleDouble& a, const DoubleDouble& b) {
    return a.hi == b.hi && a.lo == b.lo;
  }
  friend constexpr std::partial_ordering operator<=>(const DoubleDouble& a, const DoubleDouble& b) {
    if (auto c = a.hi <=> b.hi; c != 0) return c;
    return a.lo <=> b.lo;
  }

  friend std::ostream& operator<<(std::ostream& os, const DoubleDouble& x) {
    return os << x.hi << " + " << x.lo;
  }
};

inline DoubleDouble abs(const DoubleDouble& x) { return x.hi < 0.0 ? -x : x; }

inline double to_double(double x) { return x; }
inline double to_double(const DoubleDouble& x) { return x.hi + x.lo; }

}  // namespace atomgw::numerics
