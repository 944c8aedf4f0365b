#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "atomgw/atom.hpp"
#include "atomgw/constants.hpp"
#include "atomgw/error.hpp"

namespace atomgw {

/// (4 N omega_a h / c)(x1 - x2) sin^2(omega T / 2) sin(phi0 + omega T).
inline double differential_phase_analytic(int N, double omega_a, double h, double x1, double x2, double omega,
                                          double T, double phi0) {
  const double s = std::sin(0.5 * omega * T);
  return 4.0 * N * omega_a * h / c_light * (x1 - x2) * s * s * std::sin(phi0 + omega * T);
}

/// Envelope of the differential phase at a given omega T: the phi0-maximized magnitude.
inline double differential_phase_envelope(int N, double omega_a, double h, double baseline, double omega, double T) {
  const double s = std::sin(0.5 * omega * T);
  return 4.0 * N * omega_a * h / c_light * std::abs(baseline) * s * s;
}

/// Largest phase for an excited residence N L / c bounded by the lifetime: 4 omega_a (N L / c) h.
inline double q_bound(const AtomSpecies& atom, int N, double L, double h) {
  const double residence = N * L / c_light;
  if (residence > atom.tau) throw ValidationError("q_bound requires N L / c <= tau");
  return 4.0 * atom.omega_a * residence * h;
}

struct SensitivityConfig {
  double delta_phi = 1e-4;  // rad/sqrt(Hz)
  std::vector<double> frequencies_hz;
  int N = 300;
  double T = 50.0;
  double L = 1e6;
  double omega_a = 0.0;
  bool corner_locked = false;  // use T = pi / omega at every frequency

  void validate() const {
    if (!(delta_phi >= 0.0)) throw ValidationError("delta_phi must be >= 0");
    if (N < 1) throw ValidationError("sensitivity N must be >= 1");
    if (!(L > 0.0)) throw ValidationError("sensitivity L must be > 0");
    if (!(omega_a > 0.0)) throw ValidationError("sensitivity omega_a must be > 0");
    if (!corner_locked && !(T > 0.0)) throw ValidationError("sensitivity T must be > 0");
    for (std::size_t i = 0; i < frequencies_hz.size(); ++i) {
      if (!(frequencies_hz[i] > 0.0)) throw ValidationError("frequency grid must be positive");
      if (i > 0 && !(frequencies_hz[i] > frequencies_hz[i - 1])) {
        throw ValidationError("frequency grid must be strictly increasing");
      }
    }
  }
};

struct SensitivityPoint {
  double frequency_hz = 0.0;
  double h_asd = 0.0;  // +inf where the response vanishes
};

/// Log-spaced grid including both endpoints.
inline std::vector<double> log_frequency_grid(double f_min, double f_max, int points) {
  if (!(f_min > 0.0) || !(f_max > f_min) || points < 2) throw ValidationError("invalid frequency grid");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double ratio = std::log(f_max / f_min);
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = f_min * std::exp(ratio * i / (points - 1));
  return grid;
}

/// Strain ASD at which the signal amplitude equals delta_phi.
inline double strain_sensitivity_at(double delta_phi, int N, double omega_a, double L, double omega, double T) {
  const double s = std::sin(0.5 * omega * T);
  const double response = 4.0 * N * omega_a * L / c_light * s * s;
  const double floor = 1e-12 * 4.0 * N * omega_a * L / c_light;
  if (!(response > floor)) return std::numeric_limits<double>::infinity();
  return delta_phi / response;
}

inline std::vector<SensitivityPoint> strain_sensitivity_curve(const SensitivityConfig& config) {
  config.validate();
  std::vector<SensitivityPoint> out;
  out.reserve(config.frequencies_hz.size());
  for (const double f : config.frequencies_hz) {
    const double omega = two_pi * f;
    const double T = config.corner_locked ? std::numbers::pi / omega : config.T;
    out.push_back({f, strain_sensitivity_at(config.delta_phi, config.N, config.omega_a, config.L, omega, T)});
  }
  return out;
}

/// Blackbody shift law: coeff_300k (T / 300 K)^4 in Hz.
inline double blackbody_shift(const AtomSpecies& atom, double temperature) {
  const double r = temperature / 300.0;
  return atom.blackbody_coeff_300k * r * r * r * r;
}

struct BlackbodyScenario {
  int N = 300;
  double L = 1e6;
};

/*!
  Temperature stability at which blackbody-shift fluctuations match the
  signal at `target_strain`. A frequency fluctuation dnu integrated over the
  total excited residence 2 N L / c gives a differential phase
  2 pi dnu (2 N L / c), with the two ensembles' environments uncorrelated.
*/
inline double blackbody_requirement(const AtomSpecies& atom, double temperature, double target_strain,
                                    const BlackbodyScenario& scenario) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be > 0");
  const double slope = 4.0 * atom.blackbody_coeff_300k * temperature * temperature * temperature /
                       (300.0 * 300.0 * 300.0 * 300.0);
  if (slope == 0.0) return std::numeric_limits<double>::infinity();
  const double signal = 4.0 * scenario.N * atom.omega_a * target_strain * scenario.L / c_light;
  const double residence = 2.0 * scenario.N * scenario.L / c_light;
  const double allowed_dnu = signal / (two_pi * residence);
  return allowed_dnu / std::abs(slope);
}

inline double zeeman_shift(double field_gauss, double coefficient = -0.23) {
  return coefficient * field_gauss * field_gauss;
}

inline double zeeman_shift(const AtomSpecies& atom, double field_gauss) {
  return zeeman_shift(field_gauss, atom.zeeman_coeff);
}

/// Refractive-index noise as an equivalent strain: (n - 1) dn_p / n_p.
inline double plasma_strain_bound(double refractivity, double fractional_density_fluctuation) {
  if (!(refractivity >= 0.0) || !(fractional_density_fluctuation >= 0.0)) {
    throw ValidationError("plasma bound inputs must be >= 0");
  }
  return refractivity * fractional_density_fluctuation;
}

/// c dk / Omega = 0.02 for a 10% contrast-loss budget, scaled linearly with the budget.
inline double contrast_requirement(double rabi_hz, double contrast_loss_budget = 0.1) {
  if (!(rabi_hz > 0.0)) throw ValidationError("Rabi frequency must be > 0");
  if (!(contrast_loss_budget > 0.0)) throw ValidationError("contrast loss budget must be > 0");
  return 0.02 * (contrast_loss_budget / 0.1) * rabi_hz;
}

/// Doppler splitting 2 N hbar k^2 / m in rad/s, compared against the Rabi frequency for arm selectivity.
inline double doppler_splitting(const AtomSpecies& atom, int N, double k) { return 2.0 * N * hbar * k * k / atom.mass; }

}  // namespace atomgw
