#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "atomgw/constants.hpp"
#include "atomgw/error.hpp"
#include "atomgw/numerics/quadrature.hpp"

namespace atomgw {

/// Plus-polarized wave along the baseline: strain(t) = h sin(omega t + phi0).
struct GravitationalWave {
  double h = 0.0;
  double omega = 1.0;
  double phi0 = 0.0;

  static constexpr double max_strain = 1e-3;

  void validate() const {
    if (!(h >= 0.0)) throw ValidationError("gw.h must be >= 0");
    if (!(h < max_strain)) throw ValidationError("gw.h must be < 1e-3 (linearized metric)");
    if (!(omega > 0.0)) throw ValidationError("gw.omega must be > 0");
    if (!std::isfinite(phi0)) throw ValidationError("gw.phi0 must be finite");
  }
};

struct Environment {
  double g = 0.0;

  static constexpr double max_gravity = 100.0;

  void validate() const {
    if (!(std::abs(g) <= max_gravity)) throw ValidationError("environment.g must satisfy |g| <= 100");
  }
};

struct DetectorGeometry {
  double L = 1e6;        // primary-to-secondary separation
  double x1 = 0.0;
  double x2 = 1e6;
  double delta_v = 0.0;  // velocity of ensemble 2 relative to ensemble 1

  void validate(bool differential = true) const {
    if (!(L > 0.0)) throw ValidationError("geometry.L must be > 0");
    if (!(x1 >= 0.0 && x1 <= L)) throw ValidationError("geometry.x1 must lie in [0, L]");
    if (!(x2 >= 0.0 && x2 <= L)) throw ValidationError("geometry.x2 must lie in [0, L]");
    if (differential && x1 == x2) throw ValidationError("geometry.x1 and geometry.x2 must differ");
    if (!(std::abs(delta_v) < 1e-3 * c_light)) throw ValidationError("geometry.delta_v must be << c");
  }
};

inline double strain_at(const GravitationalWave& gw, double t) { return gw.h * std::sin(gw.omega * t + gw.phi0); }

/// Closed form of the integral of strain over [t_a, t_b].
inline double strain_integral(const GravitationalWave& gw, double t_a, double t_b) {
  if (gw.h == 0.0) return 0.0;
  return gw.h / gw.omega * (std::cos(gw.omega * t_a + gw.phi0) - std::cos(gw.omega * t_b + gw.phi0));
}

/*!
  Lag of a light front relative to flat propagation, in seconds of path:
  q(t_a, t_b) = integral of ((1 + strain)^(-1/2) - 1) dt.

  A front launched at t_a sits at x_e + d c ((t - t_a) + q(t_a, t)). The
  integrand is evaluated without cancellation so q keeps full relative
  precision at tiny strain.
*/
inline double front_lag_rate(const GravitationalWave& gw, double t) {
  const double s = strain_at(gw, t);
  return std::expm1(-0.5 * std::log1p(s));
}

inline double front_lag(const GravitationalWave& gw, double t_a, double t_b) {
  if (gw.h == 0.0 || t_a == t_b) return 0.0;
  const double cycles = gw.omega * std::abs(t_b - t_a) / two_pi;
  const int panels = 1 + static_cast<int>(std::min(8.0 * cycles, 1e5));
  return numerics::integrate_gauss_legendre([&](double t) { return front_lag_rate(gw, t); }, t_a, t_b, panels);
}

/// First-order front lag, -1/2 integral of strain.
inline double front_lag_linear(const GravitationalWave& gw, double t_a, double t_b) {
  return -0.5 * strain_integral(gw, t_a, t_b);
}

enum class Propagation { exact, linear };

/*!
  Coordinate time for light to travel from `from_x` to `to_x` when emitted at
  `t_emit`; solves c (dt + q(t_emit, t_emit + dt)) = |to_x - from_x|.
*/
inline double light_travel_time(const GravitationalWave& gw, double from_x, double to_x, double t_emit,
                                Propagation method = Propagation::exact) {
  if (from_x == to_x) throw ValidationError("light_travel_time requires distinct endpoints");
  const double flat = std::abs(to_x - from_x) / c_light;
  if (gw.h == 0.0) return flat;
  const auto lag = [&](double dt) {
    return method == Propagation::exact ? front_lag(gw, t_emit, t_emit + dt)
                                        : front_lag_linear(gw, t_emit, t_emit + dt);
  };
  const double tolerance = std::max(1e-4 * gw.h * flat, 4.0 * std::numeric_limits<double>::epsilon() * flat);
  double dt = flat;
  for (int it = 0; it < 100; ++it) {
    const double next = flat - lag(dt);
    if (std::abs(next - dt) <= tolerance * 1e-4) return next;
    dt = next;
  }
  throw SimulationError("light_travel_time fixed-point iteration did not converge");
}

/// Free-fall position; the wave leaves free-atom coordinates unchanged.
constexpr double atom_worldline_position(double t0, double x0, double v, double g, double t) {
  const double dt = t - t0;
  return x0 + v * dt + 0.5 * g * dt * dt;
}

enum class LaserId { primary, secondary };

inline const char* to_string(LaserId id) { return id == LaserId::primary ? "primary" : "secondary"; }

/*!
  Position offset of a laser platform: constant acceleration over each knot
  interval, starting from rest at the first knot.
*/
class PlatformTrajectory {
 public:
  PlatformTrajectory() = default;

  PlatformTrajectory(std::vector<double> knots, std::vector<double> accelerations)
      : knots_(std::move(knots)), accel_(std::move(accelerations)) {
    if (knots_.empty()) {
      accel_.clear();
      return;
    }
    if (!std::is_sorted(knots_.begin(), knots_.end())) throw ValidationError("platform knots must be sorted");
    if (accel_.size() + 1 != knots_.size()) {
      throw ValidationError("platform trajectory needs one acceleration per knot interval");
    }
    pos_.assign(knots_.size(), 0.0);
    vel_.assign(knots_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
      const double dt = knots_[i + 1] - knots_[i];
      pos_[i + 1] = pos_[i] + vel_[i] * dt + 0.5 * accel_[i] * dt * dt;
      vel_[i + 1] = vel_[i] + accel_[i] * dt;
    }
  }

  bool is_static() const { return knots_.empty(); }

  double offset(double t) const {
    if (knots_.empty() || t <= knots_.front()) return 0.0;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double a = i < accel_.size() ? accel_[i] : 0.0;
    const double dt = t - knots_[i];
    return pos_[i] + vel_[i] * dt + 0.5 * a * dt * dt;
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& accelerations() const { return accel_; }

 private:
  std::vector<double> knots_;
  std::vector<double> accel_;
  std::vector<double> pos_;
  std::vector<double> vel_;
};

struct LaserPlatform {
  LaserId id = LaserId::primary;
  double nominal_position = 0.0;
  PlatformTrajectory perturbation;

  double position(double t) const { return nominal_position + perturbation.offset(t); }
};

struct Platforms {
  LaserPlatform primary{LaserId::primary, 0.0, {}};
  LaserPlatform secondary{LaserId::secondary, 0.0, {}};

  static Platforms nominal(double L) {
    Platforms p;
    p.secondary.nominal_position = L;
    return p;
  }

  const LaserPlatform& operator[](LaserId id) const { return id == LaserId::primary ? primary : secondary; }
  LaserPlatform& operator[](LaserId id) { return id == LaserId::primary ? primary : secondary; }
};

}  // namespace atomgw
