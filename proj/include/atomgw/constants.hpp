#pragma once

#include <numbers>

namespace atomgw {

/// SI constants shared by every module.
struct PhysicalConstants {
  static constexpr double c = 299792458.0;          // m/s, exact
  static constexpr double hbar = 1.054571817e-34;   // J s
  static constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
  static constexpr double standard_gravity = 9.80665;            // m/s^2
};

inline constexpr double c_light = PhysicalConstants::c;
inline constexpr double hbar = PhysicalConstants::hbar;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace atomgw
