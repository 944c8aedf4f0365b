#pragma once

#include <cmath>

namespace atomgw::numerics {

/*!
  Neumaier-compensated running sum.

  Works for any field type with + and -; used on doubles for Monte Carlo
  moments and on extended types for the phase ledger, where it keeps the
  ordering of several thousand signed contributions from mattering.
*/
template <typename T>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(const T& init) : sum_(init) {}

  CompensatedSum& operator+=(const T& x) {
    const T t = sum_ + x;
    if (magnitude(sum_) >= magnitude(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }
  CompensatedSum& operator-=(const T& x) { return *this += -x; }

  T value() const { return sum_ + compensation_; }

 private:
  template <typename U>
  static double magnitude(const U& u) {
    using std::abs;
    return std::abs(reference(u));
  }
  static double reference(double u) { return u; }
  template <typename U>
  static double reference(const U& u) {
    return reference_value(u);
  }

  T sum_{};
  T compensation_{};
};

}  // namespace atomgw::numerics
