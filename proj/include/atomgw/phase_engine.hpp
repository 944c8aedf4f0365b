#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atomgw/atom.hpp"
#include "atomgw/constants.hpp"
#include "atomgw/error.hpp"
#include "atomgw/numerics/compensated_sum.hpp"
#include "atomgw/numerics/double_double.hpp"
#include "atomgw/numerics/dual.hpp"
#include "atomgw/numerics/root_finding.hpp"
#include "atomgw/pulse_sequence.hpp"
#include "atomgw/spacetime.hpp"

namespace atomgw {

/*!
  direct: everything evaluated numerically in double-double, exact light
  propagation.

  perturbative: a flat, gravity-free, noise-free reference rides in the value
  part of a dual number and strain, gravity and noise offsets ride in the
  first-order part, so the O(h) signal never shares a mantissa with the O(1)
  reference.
*/
enum class EngineMode { direct, perturbative };

inline const char* to_string(EngineMode m) { return m == EngineMode::direct ? "direct" : "perturbative"; }

using numerics::DoubleDouble;
using PerturbativeScalar = numerics::Dual<DoubleDouble>;

template <typename S>
struct ScalarPolicy;

template <>
struct ScalarPolicy<DoubleDouble> {
  static constexpr EngineMode mode = EngineMode::direct;
  static DoubleDouble perturbation(double x) { return x; }
  static DoubleDouble lag(const GravitationalWave& gw, const DoubleDouble& t_a, const DoubleDouble& t_b) {
    return front_lag(gw, numerics::to_double(t_a), numerics::to_double(t_b));
  }
};

template <>
struct ScalarPolicy<PerturbativeScalar> {
  static constexpr EngineMode mode = EngineMode::perturbative;
  static PerturbativeScalar perturbation(double x) { return {DoubleDouble(0.0), DoubleDouble(x)}; }
  static PerturbativeScalar lag(const GravitationalWave& gw, const PerturbativeScalar& t_a,
                                const PerturbativeScalar& t_b) {
    return perturbation(front_lag_linear(gw, numerics::reference_value(t_a), numerics::reference_value(t_b)));
  }
};

struct PhaseLedger {
  double internal = 0.0;
  double kinetic = 0.0;
  double laser = 0.0;
  double separation = 0.0;
  double total = 0.0;
};

struct ArmSegment {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  bool excited = false;
};

struct VertexRecord {
  std::size_t pulse_index = 0;
  double t = 0.0;
  double x = 0.0;
  double imprinted_phase = 0.0;
  int sign = 0;  // +1 absorption, -1 stimulated emission
};

struct ArmTrajectory {
  std::vector<ArmSegment> segments;
  std::vector<VertexRecord> vertices;
};

struct ClosureGap {
  double dx = 0.0;  // excited_arm minus ground_arm at the closing vertex
  double dv = 0.0;
};

struct InterferometerResult {
  EngineMode mode = EngineMode::perturbative;
  double delta_phi_single = 0.0;  // ground_arm minus excited_arm
  PhaseLedger ledger;
  double residence_ground_arm = 0.0;
  double residence_excited_arm = 0.0;
  ClosureGap closure;
  double end_time = 0.0;
  double p_ground = 1.0;
  double p_excited = 0.0;
  ArmTrajectory ground_arm;
  ArmTrajectory excited_arm;
};

struct DifferentialResult {
  double delta_phi = 0.0;
  InterferometerResult first;
  InterferometerResult second;
};

struct AtomStart {
  double x = 0.0;
  double v = 0.0;
};

struct EngineOptions {
  EngineMode mode = EngineMode::perturbative;
  double contrast = 1.0;
  double closure_velocity_tolerance = 1e-2;  // fraction of the single-photon recoil velocity
  double closure_position_tolerance = 1e-2;  // fraction of recoil velocity times T
  bool enforce_lifetime = true;
  bool record_trajectories = true;
};

/// Standard two-port readout: P_excited = (1 - contrast cos(delta_phi)) / 2.
inline std::pair<double, double> port_populations(double delta_phi, double contrast = 1.0) {
  if (!(contrast >= 0.0 && contrast <= 1.0)) throw ValidationError("contrast must lie in [0, 1]");
  const double p_excited = 0.5 * (1.0 - contrast * std::cos(delta_phi));
  return {1.0 - p_excited, p_excited};
}

namespace detail {

template <typename S>
struct Arm {
  S t{};
  S x{};
  S v{};
  bool excited = false;
  ArmTrajectory trajectory;
};

/// Laser pulse with offsets applied, in the engine scalar.
template <typename S>
struct ActivePulse {
  S t_emit{};
  S x_emit{};
  S k{};
  S delta_k{};
  S phase{};
  int direction = 1;
};

template <typename S>
ActivePulse<S> activate(const PulseSpec& p, const Platforms& platforms) {
  using Policy = ScalarPolicy<S>;
  ActivePulse<S> a;
  a.direction = p.direction;
  a.t_emit = S(p.emission_time) + Policy::perturbation(p.timing_offset);
  const auto& platform = platforms[p.source];
  a.x_emit = S(platform.nominal_position) + Policy::perturbation(platform.perturbation.offset(p.actual_emission_time()));
  a.delta_k = Policy::perturbation(p.k_offset);
  a.k = S(p.k) + a.delta_k;
  const S d(static_cast<double>(p.direction));
  // Phase of the emitted field, frozen at emission.
  a.phase = d * a.k * a.x_emit - S(c_light) * a.k * a.t_emit + Policy::perturbation(p.phase_offset);
  return a;
}

/*!
  Intersection of a light front with a ballistic arm. Solved for the flight
  time tau in double by safeguarded Newton, then polished in S so the result
  carries full extended precision (direct) or the implicit first-order
  response (perturbative).
*/
template <typename S>
S resolve_vertex_time(const ActivePulse<S>& pulse, const Arm<S>& arm, const S& g, const GravitationalWave& gw,
                      double length_scale) {
  using Policy = ScalarPolicy<S>;
  using numerics::to_double;
  const double d = pulse.direction;
  const S delta = pulse.t_emit - arm.t;
  const S xa_at_emit = arm.x + arm.v * delta + S(0.5) * g * delta * delta;
  const S v_at_emit = arm.v + g * delta;
  const S ahead = S(d) * (xa_at_emit - pulse.x_emit);

  const double ahead_d = to_double(ahead);
  const double vd = d * to_double(v_at_emit);
  const double gd = d * to_double(g);
  const double te = to_double(pulse.t_emit);
  if (ahead_d < 0.0) {
    throw SimulationError("no intersection: arm lies behind the emitting laser");
  }
  const auto f = [&](double tau) -> std::pair<double, double> {
    const double q = ScalarPolicy<S>::mode == EngineMode::direct ? front_lag(gw, te, te + tau)
                                                                 : front_lag_linear(gw, te, te + tau);
    const double rate = ScalarPolicy<S>::mode == EngineMode::direct ? front_lag_rate(gw, te + tau)
                                                                    : -0.5 * strain_at(gw, te + tau);
    const double value = c_light * (tau + q) - ahead_d - vd * tau - 0.5 * gd * tau * tau;
    const double slope = c_light * (1.0 + rate) - vd - gd * tau;
    return {value, slope};
  };
  double tau_d = 0.0;
  if (ahead_d > 0.0) {
    double hi = 2.0 * ahead_d / c_light + 1e-12 * length_scale / c_light;
    int expand = 0;
    while (f(hi).first <= 0.0) {
      hi *= 2.0;
      if (++expand > 60) throw SimulationError("no intersection: light front never reaches the arm");
    }
    tau_d = numerics::solve_bracketed(f, 0.0, hi);
  }
  S tau(tau_d);
  for (int it = 0; it < 3; ++it) {
    const S q = Policy::lag(gw, pulse.t_emit, pulse.t_emit + tau);
    const S residual = S(c_light) * (tau + q) - ahead - S(d) * (v_at_emit * tau + S(0.5) * g * tau * tau);
    tau -= residual / S(f(to_double(tau)).second);
  }
  return pulse.t_emit + tau;
}

template <typename S>
class Ledger {
 public:
  void add_internal(int sign, const S& x) { add(internal_, sign, x); }
  void add_kinetic(int sign, const S& x) { add(kinetic_, sign, x); }
  void add_laser(int sign, const S& x) { add(laser_, sign, x); }
  void add_separation(const S& x) { separation_ += x; }

  S total() const { return ((internal_.value() + kinetic_.value()) + laser_.value()) + separation_.value(); }

  PhaseLedger finish() const {
    using numerics::to_double;
    return {to_double(internal_.value()), to_double(kinetic_.value()), to_double(laser_.value()),
            to_double(separation_.value()), to_double(total())};
  }

 private:
  static void add(numerics::CompensatedSum<S>& acc, int sign, const S& x) {
    if (sign > 0) {
      acc += x;
    } else {
      acc -= x;
    }
  }
  numerics::CompensatedSum<S> internal_;
  numerics::CompensatedSum<S> kinetic_;
  numerics::CompensatedSum<S> laser_;
  numerics::CompensatedSum<S> separation_;
};

template <typename S>
struct Engine {
  const PulseSequence& seq;
  const AtomSpecies& atom;
  const GravitationalWave& gw;
  const Platforms& platforms;
  const EngineOptions& options;
  S g;
  S m_over_hbar;
  S hbar_over_m;
  S omega_a;
  double x_origin;
  Ledger<S> ledger;
  std::array<S, 2> residence{};
  std::array<Arm<S>, 2> arms;  // [ground_arm, excited_arm]

  // Ledger sign: ground_arm enters with +1, excited_arm with -1.
  static int arm_sign(int arm) { return arm == 0 ? +1 : -1; }

  void record_segment(int a) {
    if (!options.record_trajectories) return;
    using numerics::to_double;
    auto& arm = arms[static_cast<std::size_t>(a)];
    arm.trajectory.segments.push_back({to_double(arm.t), to_double(arm.x), to_double(arm.v), arm.excited});
  }

  void advance(int a, const S& t) {
    auto& arm = arms[static_cast<std::size_t>(a)];
    const S dt = t - arm.t;
    const S& v = arm.v;
    const S xi = arm.x - S(x_origin);
    const S dt2 = dt * dt;
    const S dt3 = dt2 * dt;
    // (m/hbar) integral of (v^2/2 + g (x - x0)) over the ballistic segment.
    const S kinetic = S(0.5) * (v * v * dt + v * g * dt2 + g * g * dt3 / S(3.0)) +
                      g * (xi * dt + v * dt2 * S(0.5) + g * dt3 / S(6.0));
    ledger.add_kinetic(arm_sign(a), m_over_hbar * kinetic);
    if (arm.excited) {
      ledger.add_internal(arm_sign(a), -omega_a * dt);
      residence[static_cast<std::size_t>(a)] += dt;
    }
    arm.x = arm.x + v * dt + S(0.5) * g * dt2;
    arm.v = arm.v + g * dt;
    arm.t = t;
  }

  void interact(int a, std::size_t pulse_index, const PulseSpec& spec, const ActivePulse<S>& pulse) {
    auto& arm = arms[static_cast<std::size_t>(a)];
    const S t = resolve_vertex_time(pulse, arm, g, gw, seq.baseline);
    const double lag = numerics::to_double(arm.t - t);
    if (lag > 1e-6 * seq.baseline / c_light) {
      throw SimulationError("vertex collision: pulse " + std::to_string(pulse_index) +
                            " reaches the arm before its previous vertex; increase dt_pair");
    }
    if (lag < 0.0) advance(a, t);
    const int s = arm.excited ? -1 : +1;
    const S d(static_cast<double>(pulse.direction));
    S imprint = pulse.phase;
    if (spec.delta_tau > 0.0) {
      // Finite pulse length: wavevector error times the distance the arm moves during the pulse.
      imprint += d * pulse.delta_k * arm.v * S(0.5 * spec.delta_tau);
    }
    ledger.add_laser(arm_sign(a) * s, imprint);
    arm.v += S(static_cast<double>(s)) * d * hbar_over_m * pulse.k;
    arm.excited = !arm.excited;
    if (options.record_trajectories) {
      using numerics::to_double;
      arm.trajectory.vertices.push_back({pulse_index, to_double(arm.t), to_double(arm.x), to_double(imprint), s});
    }
    record_segment(a);
  }

  InterferometerResult run(const AtomStart& start) {
    using numerics::to_double;
    if (seq.pulses.empty() || seq.pulses.front().area != PulseArea::half_pi) {
      throw ValidationError("sequence must open with a half_pi pulse");
    }
    // Common history before the split cancels between arms and is not integrated.
    Arm<S> atom_state;
    atom_state.t = S(seq.pulses.front().emission_time);
    atom_state.x = S(start.x);
    atom_state.v = S(start.v);
    const auto first = activate<S>(seq.pulses.front(), platforms);
    const S t_split = resolve_vertex_time(first, atom_state, g, gw, seq.baseline);
    const S dt0 = t_split - atom_state.t;
    atom_state.x = atom_state.x + atom_state.v * dt0 + S(0.5) * g * dt0 * dt0;
    atom_state.v = atom_state.v + g * dt0;
    atom_state.t = t_split;
    arms[0] = atom_state;
    arms[1] = atom_state;
    record_segment(0);
    const S d0(static_cast<double>(first.direction));
    ledger.add_laser(arm_sign(1), first.phase);
    arms[1].v += d0 * hbar_over_m * first.k;
    arms[1].excited = true;
    if (options.record_trajectories) {
      arms[1].trajectory.vertices.push_back({0, to_double(t_split), to_double(atom_state.x), to_double(first.phase), +1});
    }
    record_segment(1);

    std::optional<S> t_end;
    for (std::size_t i = 1; i < seq.pulses.size(); ++i) {
      const auto& spec = seq.pulses[i];
      const auto pulse = activate<S>(spec, platforms);
      if (spec.area == PulseArea::half_pi) {
        if (arms[0].excited == arms[1].excited) {
          throw SimulationError("closing beamsplitter finds both arms in the same internal state");
        }
        const int emitter = arms[0].excited ? 0 : 1;
        interact(emitter, i, spec, pulse);
        t_end = arms[static_cast<std::size_t>(emitter)].t;
        break;
      }
      if (spec.target != ArmTarget::excited_arm) interact(0, i, spec, pulse);
      if (spec.target != ArmTarget::ground_arm) interact(1, i, spec, pulse);
    }
    if (!t_end) throw ValidationError("sequence must close with a half_pi pulse");
    for (int a = 0; a < 2; ++a) {
      if (numerics::to_double(*t_end - arms[static_cast<std::size_t>(a)].t) > 0.0) {
        advance(a, *t_end);
        record_segment(a);
      }
    }

    const S dx = arms[1].x - arms[0].x;
    const S dv = arms[1].v - arms[0].v;
    const S v_mean = S(0.5) * (arms[0].v + arms[1].v);
    ledger.add_separation(m_over_hbar * v_mean * dx);

    InterferometerResult r;
    r.mode = ScalarPolicy<S>::mode;
    r.ledger = ledger.finish();
    r.delta_phi_single = r.ledger.total;
    r.residence_ground_arm = to_double(residence[0]);
    r.residence_excited_arm = to_double(residence[1]);
    r.closure = {to_double(dx), to_double(dv)};
    r.end_time = to_double(*t_end);
    std::tie(r.p_ground, r.p_excited) = port_populations(r.delta_phi_single, options.contrast);

    const double k_nominal = seq.pulses.front().k;
    const double v_recoil = atom.recoil_velocity(k_nominal);
    if (std::abs(r.closure.dv) > options.closure_velocity_tolerance * v_recoil ||
        std::abs(r.closure.dx) > options.closure_position_tolerance * v_recoil * seq.T) {
      throw SimulationError("interferometer does not close: dx = " + std::to_string(r.closure.dx) +
                            " m, dv = " + std::to_string(r.closure.dv) + " m/s");
    }
    if (options.enforce_lifetime && std::max(r.residence_ground_arm, r.residence_excited_arm) > atom.tau) {
      throw SimulationError("excited residence exceeds the atom lifetime");
    }
    if (options.record_trajectories) {
      r.ground_arm = std::move(arms[0].trajectory);
      r.excited_arm = std::move(arms[1].trajectory);
    }
    return r;
  }
};

/// Result plus the unrounded phase, so differential phases subtract before rounding.
template <typename S>
std::pair<InterferometerResult, S> run_with_scalar(const PulseSequence& seq, const AtomStart& start,
                                                   const AtomSpecies& atom, const GravitationalWave& gw,
                                                   const Environment& env, const Platforms& platforms,
                                                   const EngineOptions& options) {
  using Policy = ScalarPolicy<S>;
  Engine<S> engine{seq, atom, gw, platforms, options, Policy::perturbation(env.g), S(atom.mass) / S(hbar),
                   S(hbar) / S(atom.mass), S(atom.omega_a), start.x, {}, {}, {}};
  auto result = engine.run(start);
  return {std::move(result), engine.ledger.total()};
}

inline void check_run_preconditions(const PulseSequence& seq, const AtomSpecies& atom, const GravitationalWave& gw,
                                    const Environment& env, const EngineOptions& options) {
  atom.validate();
  gw.validate();
  env.validate();
  const auto report = validate_sequence(seq, atom);
  if (!report.pulses_ok || !report.ordering_ok || !report.pairing_ok) {
    throw ValidationError("invalid pulse sequence: " + report.failures.front());
  }
  if (options.enforce_lifetime && !report.residence_ok) throw SimulationError(report.failures.back());
}

template <typename S>
DifferentialResult run_differential_with_scalar(const PulseSequence& seq, const DetectorGeometry& geometry,
                                                const AtomSpecies& atom, const GravitationalWave& gw,
                                                const Environment& env, const Platforms& platforms,
                                                const EngineOptions& options) {
  auto [first, phase_first] = run_with_scalar<S>(seq, {geometry.x1, 0.0}, atom, gw, env, platforms, options);
  auto [second, phase_second] =
      run_with_scalar<S>(seq, {geometry.x2, geometry.delta_v}, atom, gw, env, platforms, options);
  DifferentialResult r;
  r.delta_phi = numerics::to_double(phase_first - phase_second);
  r.first = std::move(first);
  r.second = std::move(second);
  return r;
}

}  // namespace detail

/*!
  Evolves both arms of one atom through every pulse and returns the phase of
  the ground arm minus the excited arm, with its ledger.
*/
inline InterferometerResult run_interferometer(const PulseSequence& seq, const AtomStart& start,
                                               const AtomSpecies& atom, const GravitationalWave& gw,
                                               const Environment& env, const Platforms& platforms,
                                               const EngineOptions& options = {}) {
  detail::check_run_preconditions(seq, atom, gw, env, options);
  if (options.mode == EngineMode::direct) {
    return detail::run_with_scalar<DoubleDouble>(seq, start, atom, gw, env, platforms, options).first;
  }
  return detail::run_with_scalar<PerturbativeScalar>(seq, start, atom, gw, env, platforms, options).first;
}

inline InterferometerResult run_interferometer(const PulseSequence& seq, const AtomStart& start,
                                               const AtomSpecies& atom, const GravitationalWave& gw,
                                               const Environment& env, const EngineOptions& options = {}) {
  return run_interferometer(seq, start, atom, gw, env, Platforms::nominal(seq.baseline), options);
}

/// Two ensembles at x1 (at rest) and x2 (moving at delta_v) driven by the same pulses.
inline DifferentialResult run_differential(const PulseSequence& seq, const DetectorGeometry& geometry,
                                           const AtomSpecies& atom, const GravitationalWave& gw,
                                           const Environment& env, const Platforms& platforms,
                                           const EngineOptions& options = {}) {
  geometry.validate(true);
  detail::check_run_preconditions(seq, atom, gw, env, options);
  if (options.mode == EngineMode::direct) {
    return detail::run_differential_with_scalar<DoubleDouble>(seq, geometry, atom, gw, env, platforms, options);
  }
  return detail::run_differential_with_scalar<PerturbativeScalar>(seq, geometry, atom, gw, env, platforms, options);
}

inline DifferentialResult run_differential(const PulseSequence& seq, const DetectorGeometry& geometry,
                                           const AtomSpecies& atom, const GravitationalWave& gw,
                                           const Environment& env, const EngineOptions& options = {}) {
  return run_differential(seq, geometry, atom, gw, env, Platforms::nominal(geometry.L), options);
}

}  // namespace atomgw
