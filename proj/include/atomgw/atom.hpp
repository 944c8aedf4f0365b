#pragma once

#include <cmath>

#include "atomgw/constants.hpp"
#include "atomgw/error.hpp"

namespace atomgw {

/// Natural lifetime from a linewidth quoted in Hz: tau = 1 / (2 pi Gamma).
inline double lifetime_from_linewidth(double linewidth_hz) {
  if (!(linewidth_hz > 0.0)) throw ValidationError("linewidth must be > 0");
  return 1.0 / (two_pi * linewidth_hz);
}

struct AtomSpecies {
  double mass = 0.0;                 // kg
  double omega_a = 0.0;              // rad/s
  double tau = 0.0;                  // s
  double blackbody_coeff_300k = 0.0; // Hz at 300 K, scales as (T/300 K)^4
  double zeeman_coeff = 0.0;         // Hz/G^2

  double quality_factor() const { return omega_a * tau; }
  double recoil_velocity(double k) const { return hbar * k / mass; }

  void validate() const {
    if (!(mass > 0.0)) throw ValidationError("atom.mass must be > 0");
    if (!(omega_a > 0.0)) throw ValidationError("atom.omega_a must be > 0");
    if (!(tau > 0.0)) throw ValidationError("atom.tau must be > 0");
  }
};

/// Strontium-87 on the 698 nm 1S0 - 3P0 clock line with a 1 mHz linewidth.
inline AtomSpecies strontium87() {
  AtomSpecies sr;
  sr.mass = 86.9088775 * PhysicalConstants::atomic_mass_unit;
  sr.omega_a = two_pi * 429228004229873.0;
  sr.tau = lifetime_from_linewidth(1e-3);
  sr.blackbody_coeff_300k = -2.3;
  sr.zeeman_coeff = -0.23;
  return sr;
}

}  // namespace atomgw
