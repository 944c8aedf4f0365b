#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "atomgw/atom.hpp"
#include "atomgw/constants.hpp"
#include "atomgw/error.hpp"
#include "atomgw/io/format.hpp"
#include "atomgw/spacetime.hpp"

namespace atomgw {

enum class PulseArea { half_pi, pi };

/// Arm identity: the half left in the ground state by the opening beamsplitter,
/// the half it excites, or both halves.
enum class ArmTarget { ground_arm, excited_arm, both };

enum class Fragment { opening = 0, mirror = 1, closing = 2 };

enum class MirrorVariant { primary_first, secondary_first };

inline const char* to_string(PulseArea a) { return a == PulseArea::half_pi ? "half_pi" : "pi"; }
inline const char* to_string(ArmTarget t) {
  switch (t) {
    case ArmTarget::ground_arm: return "ground_arm";
    case ArmTarget::excited_arm: return "excited_arm";
    case ArmTarget::both: return "both";
  }
  return "both";
}
inline const char* to_string(Fragment f) {
  switch (f) {
    case Fragment::opening: return "opening";
    case Fragment::mirror: return "mirror";
    case Fragment::closing: return "closing";
  }
  return "opening";
}
inline const char* to_string(MirrorVariant v) {
  return v == MirrorVariant::primary_first ? "primary_first" : "secondary_first";
}

struct PulseSpec {
  LaserId source = LaserId::primary;
  double emission_time = 0.0;
  PulseArea area = PulseArea::pi;
  double k = 0.0;
  int direction = +1;  // +1 travels toward +x (primary), -1 toward -x (secondary)
  ArmTarget target = ArmTarget::both;
  double delta_tau = 0.0;
  double phase_offset = 0.0;
  Fragment fragment = Fragment::opening;
  double timing_offset = 0.0;
  double k_offset = 0.0;

  double actual_emission_time() const { return emission_time + timing_offset; }

  void validate() const {
    if (area == PulseArea::half_pi && target != ArmTarget::both) {
      throw ValidationError("half_pi pulses must target both arms");
    }
    if (direction != (source == LaserId::primary ? +1 : -1)) {
      throw ValidationError("pulse direction inconsistent with source laser");
    }
    if (!(k > 0.0)) throw ValidationError("pulse k must be > 0");
    if (!(delta_tau >= 0.0)) throw ValidationError("pulse duration must be >= 0");
  }

  friend bool operator==(const PulseSpec&, const PulseSpec&) = default;
};

struct PulseSequence {
  std::vector<PulseSpec> pulses;
  int N = 1;
  double T = 0.0;
  double dt_pair = 0.0;
  double baseline = 0.0;

  std::size_t size() const { return pulses.size(); }

  friend bool operator==(const PulseSequence&, const PulseSequence&) = default;
};

/// Gap from the second pulse of one LMT pair to the first pulse of the next.
inline double default_dt_pair(double L, double delta_tau) { return 1.1 * std::max(2.0 * delta_tau, L / c_light); }

inline double pair_period(double L, double dt_pair) { return L / c_light + dt_pair; }

namespace detail {

inline PulseSpec make_pulse(LaserId src, double t, PulseArea area, double k, ArmTarget target, double delta_tau,
                            Fragment fragment) {
  PulseSpec p;
  p.source = src;
  p.emission_time = t;
  p.area = area;
  p.k = k;
  p.direction = src == LaserId::primary ? +1 : -1;
  p.target = target;
  p.delta_tau = delta_tau;
  p.fragment = fragment;
  return p;
}

inline void check_fragment_args(const DetectorGeometry& geometry, int N, double k, double dt_pair) {
  if (N < 1) throw ValidationError("LMT order N must be >= 1");
  if (!(dt_pair >= 0.0)) throw ValidationError("dt_pair must be >= 0");
  if (!(k > 0.0)) throw ValidationError("wavevector k must be > 0");
  if (!(geometry.L > 0.0)) throw ValidationError("geometry.L must be > 0");
}

}  // namespace detail

enum class BeamsplitterRole { opening, closing };

/*!
  LMT beamsplitter. The opening form fires a primary pi/2 at `start_time`,
  then a secondary pi on the excited arm L/c later, then N-1 primary/secondary
  pi pairs on the same arm. The closing form is its time reverse: N-1
  secondary/primary pairs and a secondary pi on the accelerated arm, ending
  with the primary pi/2.
*/
inline std::vector<PulseSpec> make_beamsplitter(const DetectorGeometry& geometry, int N, double k, double start_time,
                                                double dt_pair, BeamsplitterRole role = BeamsplitterRole::opening,
                                                double delta_tau = 0.0) {
  detail::check_fragment_args(geometry, N, k, dt_pair);
  const double lc = geometry.L / c_light;
  const double p = pair_period(geometry.L, dt_pair);
  std::vector<PulseSpec> out;
  out.reserve(static_cast<std::size_t>(2 * N));
  using detail::make_pulse;
  if (role == BeamsplitterRole::opening) {
    for (int j = 0; j < N; ++j) {
      const double t = start_time + j * p;
      if (j == 0) {
        out.push_back(make_pulse(LaserId::primary, t, PulseArea::half_pi, k, ArmTarget::both, delta_tau,
                                 Fragment::opening));
      } else {
        out.push_back(make_pulse(LaserId::primary, t, PulseArea::pi, k, ArmTarget::excited_arm, delta_tau,
                                 Fragment::opening));
      }
      out.push_back(make_pulse(LaserId::secondary, t + lc, PulseArea::pi, k, ArmTarget::excited_arm, delta_tau,
                               Fragment::opening));
    }
  } else {
    for (int j = 0; j < N - 1; ++j) {
      const double t = start_time + j * p;
      out.push_back(make_pulse(LaserId::secondary, t, PulseArea::pi, k, ArmTarget::ground_arm, delta_tau,
                               Fragment::closing));
      out.push_back(make_pulse(LaserId::primary, t + lc, PulseArea::pi, k, ArmTarget::ground_arm, delta_tau,
                               Fragment::closing));
    }
    const double t = start_time + (N - 1) * p;
    out.push_back(
        make_pulse(LaserId::secondary, t, PulseArea::pi, k, ArmTarget::ground_arm, delta_tau, Fragment::closing));
    out.push_back(
        make_pulse(LaserId::primary, t + lc, PulseArea::half_pi, k, ArmTarget::both, delta_tau, Fragment::closing));
  }
  return out;
}

/*!
  LMT mirror: N-1 deceleration pairs on the excited arm, a three-pi core that
  exchanges the arms' momenta, and N-1 acceleration pairs on the ground arm.
*/
inline std::vector<PulseSpec> make_mirror(const DetectorGeometry& geometry, int N, double k, double start_time,
                                           double dt_pair, MirrorVariant variant = MirrorVariant::primary_first,
                                           double delta_tau = 0.0) {
  detail::check_fragment_args(geometry, N, k, dt_pair);
  const double lc = geometry.L / c_light;
  const double p = pair_period(geometry.L, dt_pair);
  std::vector<PulseSpec> out;
  out.reserve(static_cast<std::size_t>(4 * N - 1));
  using detail::make_pulse;
  const auto add = [&](LaserId src, double t, ArmTarget target) {
    out.push_back(make_pulse(src, t, PulseArea::pi, k, target, delta_tau, Fragment::mirror));
  };
  for (int j = 0; j < N - 1; ++j) {
    add(LaserId::secondary, start_time + j * p, ArmTarget::excited_arm);
    add(LaserId::primary, start_time + j * p + lc, ArmTarget::excited_arm);
  }
  const double core = start_time + (N - 1) * p;
  if (variant == MirrorVariant::primary_first) {
    add(LaserId::primary, core, ArmTarget::ground_arm);
    add(LaserId::secondary, core + lc, ArmTarget::both);
    add(LaserId::primary, core + 2.0 * lc, ArmTarget::excited_arm);
  } else {
    add(LaserId::secondary, core, ArmTarget::excited_arm);
    add(LaserId::primary, core + lc, ArmTarget::both);
    add(LaserId::secondary, core + 2.0 * lc, ArmTarget::ground_arm);
  }
  const double accel = core + 2.0 * lc + dt_pair;
  for (int j = 0; j < N - 1; ++j) {
    add(LaserId::primary, accel + j * p, ArmTarget::ground_arm);
    add(LaserId::secondary, accel + j * p + lc, ArmTarget::ground_arm);
  }
  return out;
}

struct SequenceOptions {
  double dt_pair = -1.0;  // negative selects default_dt_pair
  double delta_tau = 0.0;
  MirrorVariant mirror = MirrorVariant::primary_first;
};

inline double fragment_end(const std::vector<PulseSpec>& f) {
  double t = -INFINITY;
  for (const auto& p : f) t = std::max(t, p.emission_time);
  return t;
}

/*!
  Beamsplitter at t = 0, mirror at t = T, closing beamsplitter at
  t = 2T + (N-1) p + L/c with p the LMT pair period. The closing start keeps
  the sequence time-symmetric about the mirror core; for N = 1 it is 2T + L/c.
*/
inline PulseSequence make_mach_zehnder(const DetectorGeometry& geometry, int N, double k, double T,
                                       const SequenceOptions& options = {}) {
  if (N < 1) throw ValidationError("LMT order N must be >= 1");
  const double dt = options.dt_pair < 0.0 ? default_dt_pair(geometry.L, options.delta_tau) : options.dt_pair;
  const double lc = geometry.L / c_light;
  const double p = pair_period(geometry.L, dt);
  const double splitter_duration = (N - 1) * p + lc;
  if (!(T > splitter_duration)) throw ValidationError("sequence.T must exceed the beamsplitter duration");
  if (!(T > 2.0 * N * lc)) throw ValidationError("sequence.T must exceed the excited residence 2NL/c");

  auto opening = make_beamsplitter(geometry, N, k, 0.0, dt, BeamsplitterRole::opening, options.delta_tau);
  auto mirror = make_mirror(geometry, N, k, T, dt, options.mirror, options.delta_tau);
  const double closing_start = 2.0 * T + (N - 1) * p + lc;
  auto closing = make_beamsplitter(geometry, N, k, closing_start, dt, BeamsplitterRole::closing, options.delta_tau);

  if (!(fragment_end(opening) + dt < mirror.front().emission_time) ||
      !(fragment_end(mirror) + dt < closing.front().emission_time)) {
    throw ValidationError("sequence fragments overlap; increase sequence.T or reduce dt_pair");
  }

  PulseSequence seq;
  seq.N = N;
  seq.T = T;
  seq.dt_pair = dt;
  seq.baseline = geometry.L;
  seq.pulses.reserve(opening.size() + mirror.size() + closing.size());
  for (auto* f : {&opening, &mirror, &closing}) seq.pulses.insert(seq.pulses.end(), f->begin(), f->end());
  return seq;
}

struct SequenceReport {
  bool pulses_ok = true;
  bool ordering_ok = true;
  bool pairing_ok = true;
  bool residence_ok = true;
  double residence_ground_arm = 0.0;
  double residence_excited_arm = 0.0;
  double tau = 0.0;
  std::vector<std::string> failures;

  bool ok() const { return pulses_ok && ordering_ok && pairing_ok && residence_ok; }
  double max_residence() const { return std::max(residence_ground_arm, residence_excited_arm); }
};

namespace detail {

/// Excited-state residence of both arms for an atom at rest at x, flat space.
inline std::pair<double, double> flat_residence(const PulseSequence& seq, double x) {
  const double L = seq.baseline;
  bool excited[2] = {false, false};  // [ground_arm, excited_arm]
  double since[2] = {0.0, 0.0};
  double total[2] = {0.0, 0.0};
  bool split = false;
  for (const auto& p : seq.pulses) {
    const double xe = p.source == LaserId::primary ? 0.0 : L;
    const double t = p.actual_emission_time() + std::abs(x - xe) / c_light;
    const auto flip = [&](int arm) {
      if (excited[arm]) {
        total[arm] += t - since[arm];
      } else {
        since[arm] = t;
      }
      excited[arm] = !excited[arm];
    };
    if (!split) {
      if (p.area == PulseArea::half_pi) {
        split = true;
        excited[1] = true;
        since[1] = t;
      }
      continue;
    }
    if (p.area == PulseArea::half_pi) {
      for (int arm = 0; arm < 2; ++arm) {
        if (excited[arm]) flip(arm);
      }
      break;
    }
    if (p.target != ArmTarget::excited_arm) flip(0);
    if (p.target != ArmTarget::ground_arm) flip(1);
  }
  return {total[0], total[1]};
}

}  // namespace detail

/// Ordering and LMT pairing of the scheduled times, and excited residence against the atom lifetime.
inline SequenceReport validate_sequence(const PulseSequence& seq, const AtomSpecies& atom) {
  SequenceReport r;
  r.tau = atom.tau;
  const double lc = seq.baseline / c_light;
  const double tol = 1e-9 * lc;
  double last[2] = {-INFINITY, -INFINITY};
  for (std::size_t i = 0; i < seq.pulses.size(); ++i) {
    const auto& p = seq.pulses[i];
    try {
      p.validate();
    } catch (const ValidationError& e) {
      r.pulses_ok = false;
      r.failures.push_back("pulse " + std::to_string(i) + ": " + e.what());
    }
    const int laser = p.source == LaserId::primary ? 0 : 1;
    const double t = p.emission_time;
    if (!(t > last[laser])) {
      r.ordering_ok = false;
      r.failures.push_back("pulse " + std::to_string(i) + ": emission times not strictly increasing per laser");
    }
    last[laser] = t;
    if (i > 0) {
      const auto& prev = seq.pulses[i - 1];
      if (prev.source != p.source && t + tol < prev.emission_time + lc) {
        r.pairing_ok = false;
        r.failures.push_back("pulse " + std::to_string(i) + ": leaves before the preceding pulse arrives");
      }
    }
  }
  if (seq.baseline > 0.0 && !seq.pulses.empty()) {
    const auto [g, e] = detail::flat_residence(seq, 0.5 * seq.baseline);
    r.residence_ground_arm = g;
    r.residence_excited_arm = e;
    if (r.max_residence() > atom.tau) {
      r.residence_ok = false;
      r.failures.push_back("excited residence " + std::to_string(r.max_residence()) + " s exceeds lifetime " +
                           std::to_string(atom.tau) + " s");
    }
  }
  return r;
}

/*!
  Line-oriented text form. A `sequence N T dt_pair baseline` header, then one
  pulse per line:
    source time area k direction target duration phase_offset fragment timing_offset k_offset
  Values use 17 significant digits, so emit then parse is lossless. `#`
  starts a comment.
*/
inline std::string emit_sequence_text(const PulseSequence& seq) {
  using io::format_double;
  std::ostringstream out;
  out << "# source time area k direction target duration phase_offset fragment timing_offset k_offset\n";
  out << "sequence " << seq.N << ' ' << format_double(seq.T) << ' ' << format_double(seq.dt_pair) << ' '
      << format_double(seq.baseline) << '\n';
  for (const auto& p : seq.pulses) {
    out << to_string(p.source) << ' ' << format_double(p.emission_time) << ' ' << to_string(p.area) << ' '
        << format_double(p.k) << ' ' << p.direction << ' ' << to_string(p.target) << ' '
        << format_double(p.delta_tau) << ' ' << format_double(p.phase_offset) << ' ' << to_string(p.fragment)
        << ' ' << format_double(p.timing_offset) << ' ' << format_double(p.k_offset) << '\n';
  }
  return out.str();
}

inline PulseSequence parse_sequence_text(std::string_view text) {
  PulseSequence seq;
  bool header = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const auto real = [&](const std::string& t) {
      double x = 0.0;
      if (!io::parse_double(t, x)) throw ParseError(line_no, "bad number '" + t + "'");
      return x;
    };
    const auto integer = [&](const std::string& t) {
      int x = 0;
      if (!io::parse_integer(t, x)) throw ParseError(line_no, "bad integer '" + t + "'");
      return x;
    };
    if (tok[0] == "sequence") {
      if (header) throw ParseError(line_no, "duplicate sequence header");
      if (tok.size() != 5) throw ParseError(line_no, "header needs N T dt_pair baseline");
      seq.N = integer(tok[1]);
      seq.T = real(tok[2]);
      seq.dt_pair = real(tok[3]);
      seq.baseline = real(tok[4]);
      header = true;
      continue;
    }
    if (!header) throw ParseError(line_no, "pulse before the sequence header");
    if (tok.size() != 11) throw ParseError(line_no, "pulse line needs 11 fields");
    PulseSpec p;
    if (tok[0] == "primary") p.source = LaserId::primary;
    else if (tok[0] == "secondary") p.source = LaserId::secondary;
    else throw ParseError(line_no, "unknown laser '" + tok[0] + "'");
    p.emission_time = real(tok[1]);
    if (tok[2] == "half_pi") p.area = PulseArea::half_pi;
    else if (tok[2] == "pi") p.area = PulseArea::pi;
    else throw ParseError(line_no, "unknown pulse area '" + tok[2] + "'");
    p.k = real(tok[3]);
    p.direction = integer(tok[4]);
    if (tok[5] == "ground_arm") p.target = ArmTarget::ground_arm;
    else if (tok[5] == "excited_arm") p.target = ArmTarget::excited_arm;
    else if (tok[5] == "both") p.target = ArmTarget::both;
    else throw ParseError(line_no, "unknown target '" + tok[5] + "'");
    p.delta_tau = real(tok[6]);
    p.phase_offset = real(tok[7]);
    if (tok[8] == "opening") p.fragment = Fragment::opening;
    else if (tok[8] == "mirror") p.fragment = Fragment::mirror;
    else if (tok[8] == "closing") p.fragment = Fragment::closing;
    else throw ParseError(line_no, "unknown fragment '" + tok[8] + "'");
    p.timing_offset = real(tok[9]);
    p.k_offset = real(tok[10]);
    try {
      p.validate();
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
    seq.pulses.push_back(p);
  }
  if (!header) throw ParseError(line_no, "missing sequence header");
  return seq;
}

}  // namespace atomgw
