#pragma once

#include <compare>
#include <type_traits>

#include "atomgw/numerics/double_double.hpp"

namespace atomgw::numerics {

/*!
  First-order dual number: value + eps * first_order with eps^2 = 0.

  The perturbative engine runs the flat, noise-free reference in the value part
  and carries the linear response to every small quantity (strain, gravity,
  noise offsets) in the first-order part. The first-order part never mixes
  with the large reference values, so an O(h) signal keeps full relative
  precision even when the reference terms are 20 orders larger.
*/
template <typename T>
struct Dual {
  T value{};
  T first_order{};

  constexpr Dual() = default;
  constexpr Dual(const T& v) : value(v) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(const T& v, const T& d) : value(v), first_order(d) {}
  constexpr Dual(double v)  // NOLINT(google-explicit-constructor)
    requires(!std::is_same_v<T, double>)
      : value(v) {}

  Dual& operator+=(const Dual& rhs) {
    value += rhs.value;
    first_order += rhs.first_order;
    return *this;
  }
  Dual& operator-=(const Dual& rhs) {
    value -= rhs.value;
    first_order -= rhs.first_order;
    return *this;
  }
  Dual& operator*=(const Dual& rhs) {
    first_order = first_order * rhs.value + value * rhs.first_order;
    value *= rhs.value;
    return *this;
  }
  Dual& operator/=(const Dual& rhs) {
    const T inv = T(1.0) / rhs.value;
    value *= inv;
    first_order = (first_order - value * rhs.first_order) * inv;
    return *this;
  }

  Dual operator-() const { return {-value, -first_order}; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }

  // Ordering looks at the reference value only.
  friend bool operator==(const Dual& a, const Dual& b) { return a.value == b.value; }
  friend auto operator<=>(const Dual& a, const Dual& b) { return a.value <=> b.value; }
};

template <typename T>
double to_double(const Dual<T>& x) {
  return to_double(x.value + x.first_order);
}

/// Reference (zeroth-order) part as a double.
inline double reference_value(double x) { return x; }
inline double reference_value(const DoubleDouble& x) { return to_double(x); }
template <typename T>
double reference_value(const Dual<T>& x) {
  return to_double(x.value);
}

}  // namespace atomgw::numerics
