#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "atomgw/atom.hpp"
#include "atomgw/constants.hpp"
#include "atomgw/error.hpp"
#include "atomgw/phase_engine.hpp"
#include "atomgw/pulse_sequence.hpp"
#include "atomgw/spacetime.hpp"

namespace atomgw {

/*!
  Amplitudes are spectral densities over a single white band; per-sample
  standard deviations are ASD * sqrt(bandwidth).

  Timing and wavevector errors are drawn once per (fragment, laser) so that
  they are coherent across the pulses of one LMT fragment. Laser phase
  jitter is drawn independently for every pulse. Platform acceleration is
  constant over each interval between successive pulses of the same laser.
*/
struct NoiseConfig {
  double delta_a_asd = 0.0;         // m/s^2/sqrt(Hz)
  double delta_T_jitter = 0.0;      // s
  double delta_k_asd = 0.0;         // rad/m/sqrt(Hz)
  double laser_phase_jitter = 0.0;  // rad
  std::uint64_t seed = 0;

  bool is_zero() const {
    return delta_a_asd == 0.0 && delta_T_jitter == 0.0 && delta_k_asd == 0.0 && laser_phase_jitter == 0.0;
  }

  void validate() const {
    if (!(delta_a_asd >= 0.0)) throw ValidationError("noise.delta_a_asd must be >= 0");
    if (!(delta_T_jitter >= 0.0)) throw ValidationError("noise.delta_T_jitter must be >= 0");
    if (!(delta_k_asd >= 0.0)) throw ValidationError("noise.delta_k_asd must be >= 0");
    if (!(laser_phase_jitter >= 0.0)) throw ValidationError("noise.laser_phase_jitter must be >= 0");
  }
};

struct NoiseRealization {
  std::vector<double> phase_offsets;
  std::vector<double> timing_offsets;
  std::vector<double> k_offsets;
  PlatformTrajectory primary;
  PlatformTrajectory secondary;

  friend bool operator==(const NoiseRealization& a, const NoiseRealization& b) {
    return a.phase_offsets == b.phase_offsets && a.timing_offsets == b.timing_offsets &&
           a.k_offsets == b.k_offsets && a.primary.knots() == b.primary.knots() &&
           a.primary.accelerations() == b.primary.accelerations() && a.secondary.knots() == b.secondary.knots() &&
           a.secondary.accelerations() == b.secondary.accelerations();
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent seed per Monte Carlo trial.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(splitmix64(seed) ^ (trial * 0xd1b54a32d192ed03ULL));
}

namespace detail {

enum class NoiseStream : std::uint64_t { phase = 1, timing = 2, wavevector = 3, primary_platform = 4, secondary_platform = 5 };

inline std::mt19937_64 stream(std::uint64_t seed, NoiseStream kind) {
  return std::mt19937_64(splitmix64(seed + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(kind)));
}

inline double draw(std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, sigma);
  return normal(rng);
}

/// Draws one value per (fragment, laser), in order of first appearance.
inline std::vector<double> fragment_coherent(const PulseSequence& seq, std::mt19937_64& rng, double sigma) {
  std::map<std::pair<int, int>, double> drawn;
  std::vector<double> out;
  out.reserve(seq.size());
  for (const auto& p : seq.pulses) {
    const auto key = std::make_pair(static_cast<int>(p.fragment), static_cast<int>(p.source));
    auto it = drawn.find(key);
    if (it == drawn.end()) it = drawn.emplace(key, draw(rng, sigma)).first;
    out.push_back(it->second);
  }
  return out;
}

inline PlatformTrajectory platform_walk(const PulseSequence& seq, LaserId id, std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return {};
  std::vector<double> knots;
  for (const auto& p : seq.pulses) {
    if (p.source == id) knots.push_back(p.emission_time);
  }
  if (knots.size() < 2) return {};
  std::vector<double> accel(knots.size() - 1);
  for (auto& a : accel) a = draw(rng, sigma);
  return PlatformTrajectory(std::move(knots), std::move(accel));
}

}  // namespace detail

inline NoiseRealization realize_noise(const NoiseConfig& config, const PulseSequence& seq, double bandwidth) {
  config.validate();
  if (!(bandwidth > 0.0)) throw ValidationError("noise bandwidth must be > 0");
  const double root_bw = std::sqrt(bandwidth);
  NoiseRealization r;
  auto phase_rng = detail::stream(config.seed, detail::NoiseStream::phase);
  r.phase_offsets.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) r.phase_offsets.push_back(detail::draw(phase_rng, config.laser_phase_jitter));
  auto timing_rng = detail::stream(config.seed, detail::NoiseStream::timing);
  r.timing_offsets = detail::fragment_coherent(seq, timing_rng, config.delta_T_jitter);
  auto k_rng = detail::stream(config.seed, detail::NoiseStream::wavevector);
  r.k_offsets = detail::fragment_coherent(seq, k_rng, config.delta_k_asd * root_bw);
  auto p_rng = detail::stream(config.seed, detail::NoiseStream::primary_platform);
  r.primary = detail::platform_walk(seq, LaserId::primary, p_rng, config.delta_a_asd * root_bw);
  auto s_rng = detail::stream(config.seed, detail::NoiseStream::secondary_platform);
  r.secondary = detail::platform_walk(seq, LaserId::secondary, s_rng, config.delta_a_asd * root_bw);
  return r;
}

struct NoisySetup {
  PulseSequence sequence;
  Platforms platforms;
};

/// Attaches offsets to the shared pulse list, so both ensembles see identical pulses.
inline NoisySetup apply_noise(const PulseSequence& seq, const NoiseRealization& noise) {
  if (noise.phase_offsets.size() != seq.size() || noise.timing_offsets.size() != seq.size() ||
      noise.k_offsets.size() != seq.size()) {
    throw ValidationError("noise realization does not match the pulse sequence length");
  }
  NoisySetup out{seq, Platforms::nominal(seq.baseline)};
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto& p = out.sequence.pulses[i];
    p.phase_offset += noise.phase_offsets[i];
    p.timing_offset += noise.timing_offsets[i];
    p.k_offset += noise.k_offsets[i];
  }
  out.platforms.primary.perturbation = noise.primary;
  out.platforms.secondary.perturbation = noise.secondary;
  return out;
}

/// Closed-form phase noise of the four dominant terms (rad/sqrt(Hz)).
struct NoiseTermInputs {
  int N = 1;
  double delta_v = 0.0;
  double omega_a = 0.0;
  double T = 0.0;
  double delta_tau = 0.0;
  double mass = 0.0;
};

/*!
  1: acceleration noise,  N (dv/c) (omega_a/c) T^2 da
  2: timing jitter,       N (dv/c) omega_a dT
  3: finite pulse length, N dv dk dtau
  4: recoil wavevector,   N^2 (dv/c) (hbar/m) (omega_a/c) T dk
*/
inline double noise_term_phase(int term, const NoiseTermInputs& in, double amplitude) {
  const double beta = in.delta_v / c_light;
  switch (term) {
    case 1: return in.N * beta * (in.omega_a / c_light) * in.T * in.T * amplitude;
    case 2: return in.N * beta * in.omega_a * amplitude;
    case 3: return in.N * in.delta_v * amplitude * in.delta_tau;
    case 4: return double(in.N) * in.N * beta * (hbar / in.mass) * (in.omega_a / c_light) * in.T * amplitude;
    default: throw ValidationError("unknown noise term " + std::to_string(term));
  }
}

struct BudgetRow {
  int term = 0;
  double phase_noise = 0.0;  // allowed phase noise, rad/sqrt(Hz)
  double requirement = 0.0;  // in `unit`
  const char* unit = "";
  int exponent = 0;          // requirement scales as (f / f_ref)^exponent
};

struct BudgetScenario {
  int N = 300;
  double L = 1e6;
  double T = 50.0;  // <= 0 selects the antenna corner T = pi / omega
  double delta_v = 0.01;
  double delta_tau = 0.01;
  double frequency_hz = 0.01;
  double omega_a = 0.0;
  double mass = 0.0;

  double interrogation_time() const { return T > 0.0 ? T : std::numbers::pi / (two_pi * frequency_hz); }
};

/// Signal amplitude of the differential phase at omega T = pi for baseline L.
inline double signal_amplitude(int N, double omega_a, double L, double h) { return 4.0 * N * omega_a * h * L / c_light; }

inline constexpr std::array<int, 4> budget_exponents = {2, 0, 0, 1};

/*!
  Largest noise amplitude per term whose phase stays below the signal
  amplitude at `target_strain`. Units: g/sqrt(Hz) for acceleration, s for
  timing, Hz/sqrt(Hz) as c dk / 2 pi for the two wavevector terms.
*/
inline std::vector<BudgetRow> budget_report(const BudgetScenario& s, double target_strain) {
  if (!(target_strain > 0.0)) throw ValidationError("target strain must be > 0");
  if (!(s.frequency_hz > 0.0)) throw ValidationError("budget frequency must be > 0");
  const double allowed = signal_amplitude(s.N, s.omega_a, s.L, target_strain);
  const NoiseTermInputs in{s.N, s.delta_v, s.omega_a, s.interrogation_time(), s.delta_tau, s.mass};
  std::vector<BudgetRow> rows;
  for (int term = 1; term <= 4; ++term) {
    const double per_unit = noise_term_phase(term, in, 1.0);
    BudgetRow row;
    row.term = term;
    row.phase_noise = allowed;
    row.exponent = budget_exponents[static_cast<std::size_t>(term - 1)];
    const double amplitude = per_unit > 0.0 ? allowed / per_unit : INFINITY;
    switch (term) {
      case 1:
        row.requirement = amplitude / PhysicalConstants::standard_gravity;
        row.unit = "g/sqrt(Hz)";
        break;
      case 2:
        row.requirement = amplitude;
        row.unit = "s";
        break;
      default:
        row.requirement = amplitude * c_light / two_pi;
        row.unit = "Hz/sqrt(Hz)";
        break;
    }
    rows.push_back(row);
  }
  return rows;
}

struct SampleStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

/// Welford running mean and variance.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  SampleStats stats() const {
    return {mean_, n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0, n_};
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct CancellationStats {
  SampleStats differential;
  SampleStats single_first;
  SampleStats single_second;
  std::vector<double> differential_samples;
};

/// Monte Carlo spread of the differential and single phases over noise realizations.
inline CancellationStats cancellation_experiment(const PulseSequence& seq, const DetectorGeometry& geometry,
                                                 const AtomSpecies& atom, const GravitationalWave& gw,
                                                 const Environment& env, const NoiseConfig& config, int trials,
                                                 double bandwidth = 1.0, EngineOptions options = {}) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  options.record_trajectories = false;
  RunningStats diff;
  RunningStats first;
  RunningStats second;
  CancellationStats out;
  out.differential_samples.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    NoiseConfig trial_config = config;
    trial_config.seed = trial_seed(config.seed, static_cast<std::uint64_t>(t));
    const auto noisy = apply_noise(seq, realize_noise(trial_config, seq, bandwidth));
    const auto r = run_differential(noisy.sequence, geometry, atom, gw, env, noisy.platforms, options);
    diff.add(r.delta_phi);
    first.add(r.first.delta_phi_single);
    second.add(r.second.delta_phi_single);
    out.differential_samples.push_back(r.delta_phi);
  }
  out.differential = diff.stats();
  out.single_first = first.stats();
  out.single_second = second.stats();
  return out;
}

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
};

/// Least-squares line through (log x, log y).
inline PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("power-law fit needs >= 2 matched points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("power-law fit needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ValidationError("power-law fit needs distinct abscissae");
  const double slope = (n * sxy - sx * sy) / denom;
  return {slope, std::exp((sy - slope * sx) / n)};
}

}  // namespace atomgw
