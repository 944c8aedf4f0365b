#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "atomgw/atom.hpp"
#include "atomgw/error.hpp"
#include "atomgw/io/format.hpp"
#include "atomgw/noise.hpp"
#include "atomgw/phase_engine.hpp"
#include "atomgw/pulse_sequence.hpp"
#include "atomgw/spacetime.hpp"

namespace atomgw {

struct SequenceParams {
  int N = 300;
  double T = 50.0;          // s
  double k = 0.0;           // rad/m
  double dt_pair = -1.0;    // s, negative selects the default gap
  double delta_tau = 0.01;  // s
  MirrorVariant mirror = MirrorVariant::primary_first;
};

struct AnalysisParams {
  EngineMode mode = EngineMode::perturbative;
  int trials = 100;
  double f_min_hz = 1e-3;
  double f_max_hz = 10.0;
  int points = 61;
  bool corner_locked = true;
  double delta_phi = 1e-4;         // rad/sqrt(Hz)
  double target_h = 1e-20;         // 1/sqrt(Hz)
  double budget_frequency_hz = 0.01;
  double temperature_k = 100.0;
  double contrast = 1.0;
  double ellipse_delta_phi = 1.0;  // rad
  int ellipse_samples = 200;
  double ellipse_readout_noise = 0.0;
  std::string sweep;               // key=start:stop:steps, empty when unused
};

struct NoiseParams {
  NoiseConfig config;
  std::optional<std::uint64_t> seed;
  double bandwidth_hz = 1.0;
};

/// Complete description of one run; every field maps to one flat key.
struct Scenario {
  AtomSpecies atom = strontium87();
  DetectorGeometry geometry;
  GravitationalWave gw;
  Environment environment;
  SequenceParams sequence;
  NoiseParams noise;
  AnalysisParams analysis;

  Scenario() {
    sequence.k = atom.omega_a / c_light;
    geometry.delta_v = 0.01;
    gw.omega = two_pi * 0.01;
  }

  void validate() const;
  PulseSequence build_sequence() const {
    SequenceOptions opts;
    opts.dt_pair = sequence.dt_pair;
    opts.delta_tau = sequence.delta_tau;
    opts.mirror = sequence.mirror;
    return make_mach_zehnder(geometry, sequence.N, sequence.k, sequence.T, opts);
  }
  EngineOptions engine_options() const {
    EngineOptions o;
    o.mode = analysis.mode;
    o.contrast = analysis.contrast;
    return o;
  }
};

namespace detail {

struct ScenarioField {
  std::string key;
  std::string unit;
  std::function<void(Scenario&, std::string_view)> set;
  std::function<std::string(const Scenario&)> get;
};

[[noreturn]] inline void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ValidationError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(value) +
                        "'");
}

template <typename Member>
ScenarioField real_field(std::string key, std::string unit, Member get_ref) {
  ScenarioField f;
  f.key = key;
  f.unit = std::move(unit);
  f.set = [key, get_ref](Scenario& s, std::string_view v) {
    double x = 0.0;
    if (!io::parse_double(v, x) || std::isnan(x)) bad_value(key, v, "a number");
    get_ref(s) = x;
  };
  f.get = [get_ref](const Scenario& s) { return io::format_double(get_ref(s)); };
  return f;
}

template <typename Int, typename Member>
ScenarioField integer_field(std::string key, Member get_ref) {
  ScenarioField f;
  f.key = key;
  f.set = [key, get_ref](Scenario& s, std::string_view v) {
    Int x{};
    if (!io::parse_integer(v, x)) bad_value(key, v, "an integer");
    get_ref(s) = x;
  };
  f.get = [get_ref](const Scenario& s) { return std::to_string(get_ref(s)); };
  return f;
}

inline bool parse_bool(std::string_view v, bool& out) {
  if (v == "true") return out = true, true;
  if (v == "false") return out = false, true;
  return false;
}

inline const std::vector<ScenarioField>& scenario_fields() {
  static const std::vector<ScenarioField> fields = [] {
    std::vector<ScenarioField> f;
    // clang-format off
    f.push_back(real_field("atom.mass", "kg", [](auto& s) -> auto& { return s.atom.mass; }));
    f.push_back(real_field("atom.omega_a", "rad/s", [](auto& s) -> auto& { return s.atom.omega_a; }));
    f.push_back(real_field("atom.tau", "s", [](auto& s) -> auto& { return s.atom.tau; }));
    f.push_back(real_field("atom.blackbody_coeff_300k", "Hz", [](auto& s) -> auto& { return s.atom.blackbody_coeff_300k; }));
    f.push_back(real_field("atom.zeeman_coeff", "Hz/G^2", [](auto& s) -> auto& { return s.atom.zeeman_coeff; }));
    f.push_back(real_field("geometry.L", "m", [](auto& s) -> auto& { return s.geometry.L; }));
    f.push_back(real_field("geometry.x1", "m", [](auto& s) -> auto& { return s.geometry.x1; }));
    f.push_back(real_field("geometry.x2", "m", [](auto& s) -> auto& { return s.geometry.x2; }));
    f.push_back(real_field("geometry.delta_v", "m/s", [](auto& s) -> auto& { return s.geometry.delta_v; }));
    f.push_back(real_field("gw.h", "1", [](auto& s) -> auto& { return s.gw.h; }));
    f.push_back(real_field("gw.omega", "rad/s", [](auto& s) -> auto& { return s.gw.omega; }));
    f.push_back(real_field("gw.phi0", "rad", [](auto& s) -> auto& { return s.gw.phi0; }));
    f.push_back(real_field("environment.g", "m/s^2", [](auto& s) -> auto& { return s.environment.g; }));
    f.push_back(integer_field<int>("sequence.N", [](auto& s) -> auto& { return s.sequence.N; }));
    f.push_back(real_field("sequence.T", "s", [](auto& s) -> auto& { return s.sequence.T; }));
    f.push_back(real_field("sequence.k", "rad/m", [](auto& s) -> auto& { return s.sequence.k; }));
    f.push_back(real_field("sequence.dt_pair", "s", [](auto& s) -> auto& { return s.sequence.dt_pair; }));
    f.push_back(real_field("sequence.delta_tau", "s", [](auto& s) -> auto& { return s.sequence.delta_tau; }));
    // clang-format on
    {
      ScenarioField m;
      m.key = "sequence.mirror";
      m.set = [](Scenario& s, std::string_view v) {
        if (v == "primary_first") s.sequence.mirror = MirrorVariant::primary_first;
        else if (v == "secondary_first") s.sequence.mirror = MirrorVariant::secondary_first;
        else bad_value("sequence.mirror", v, "primary_first or secondary_first");
      };
      m.get = [](const Scenario& s) { return std::string(to_string(s.sequence.mirror)); };
      f.push_back(m);
    }
    // clang-format off
    f.push_back(real_field("noise.delta_a_asd", "m/s^2/sqrt(Hz)", [](auto& s) -> auto& { return s.noise.config.delta_a_asd; }));
    f.push_back(real_field("noise.delta_T_jitter", "s", [](auto& s) -> auto& { return s.noise.config.delta_T_jitter; }));
    f.push_back(real_field("noise.delta_k_asd", "rad/m/sqrt(Hz)", [](auto& s) -> auto& { return s.noise.config.delta_k_asd; }));
    f.push_back(real_field("noise.laser_phase_jitter", "rad", [](auto& s) -> auto& { return s.noise.config.laser_phase_jitter; }));
    f.push_back(real_field("noise.bandwidth_hz", "Hz", [](auto& s) -> auto& { return s.noise.bandwidth_hz; }));
    // clang-format on
    {
      ScenarioField seed;
      seed.key = "noise.seed";
      seed.set = [](Scenario& s, std::string_view v) {
        std::uint64_t x = 0;
        if (!io::parse_integer(v, x)) bad_value("noise.seed", v, "an unsigned integer");
        s.noise.seed = x;
      };
      seed.get = [](const Scenario& s) { return s.noise.seed ? std::to_string(*s.noise.seed) : std::string(); };
      f.push_back(seed);
    }
    {
      ScenarioField mode;
      mode.key = "analysis.mode";
      mode.set = [](Scenario& s, std::string_view v) {
        if (v == "perturbative") s.analysis.mode = EngineMode::perturbative;
        else if (v == "direct") s.analysis.mode = EngineMode::direct;
        else bad_value("analysis.mode", v, "perturbative or direct");
      };
      mode.get = [](const Scenario& s) { return std::string(to_string(s.analysis.mode)); };
      f.push_back(mode);
    }
    // clang-format off
    f.push_back(integer_field<int>("analysis.trials", [](auto& s) -> auto& { return s.analysis.trials; }));
    f.push_back(real_field("analysis.f_min_hz", "Hz", [](auto& s) -> auto& { return s.analysis.f_min_hz; }));
    f.push_back(real_field("analysis.f_max_hz", "Hz", [](auto& s) -> auto& { return s.analysis.f_max_hz; }));
    f.push_back(integer_field<int>("analysis.points", [](auto& s) -> auto& { return s.analysis.points; }));
    // clang-format on
    {
      ScenarioField cl;
      cl.key = "analysis.corner_locked";
      cl.set = [](Scenario& s, std::string_view v) {
        if (!parse_bool(v, s.analysis.corner_locked)) bad_value("analysis.corner_locked", v, "true or false");
      };
      cl.get = [](const Scenario& s) { return std::string(s.analysis.corner_locked ? "true" : "false"); };
      f.push_back(cl);
    }
    // clang-format off
    f.push_back(real_field("analysis.delta_phi", "rad/sqrt(Hz)", [](auto& s) -> auto& { return s.analysis.delta_phi; }));
    f.push_back(real_field("analysis.target_h", "1/sqrt(Hz)", [](auto& s) -> auto& { return s.analysis.target_h; }));
    f.push_back(real_field("analysis.budget_frequency_hz", "Hz", [](auto& s) -> auto& { return s.analysis.budget_frequency_hz; }));
    f.push_back(real_field("analysis.temperature_k", "K", [](auto& s) -> auto& { return s.analysis.temperature_k; }));
    f.push_back(real_field("analysis.contrast", "1", [](auto& s) -> auto& { return s.analysis.contrast; }));
    f.push_back(real_field("analysis.ellipse_delta_phi", "rad", [](auto& s) -> auto& { return s.analysis.ellipse_delta_phi; }));
    f.push_back(integer_field<int>("analysis.ellipse_samples", [](auto& s) -> auto& { return s.analysis.ellipse_samples; }));
    f.push_back(real_field("analysis.ellipse_readout_noise", "1", [](auto& s) -> auto& { return s.analysis.ellipse_readout_noise; }));
    // clang-format on
    {
      ScenarioField sw;
      sw.key = "analysis.sweep";
      sw.set = [](Scenario& s, std::string_view v) { s.analysis.sweep = std::string(v); };
      sw.get = [](const Scenario& s) { return s.analysis.sweep; };
      f.push_back(sw);
    }
    return f;
  }();
  return fields;
}

inline const ScenarioField* find_field(std::string_view key) {
  for (const auto& f : scenario_fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace detail

inline void Scenario::validate() const {
  atom.validate();
  geometry.validate(true);
  gw.validate();
  environment.validate();
  noise.config.validate();
  if (sequence.N < 1) throw ValidationError("sequence.N must be >= 1");
  if (!(sequence.T > 0.0)) throw ValidationError("sequence.T must be > 0");
  if (!(sequence.k > 0.0)) throw ValidationError("sequence.k must be > 0");
  if (!(sequence.delta_tau >= 0.0)) throw ValidationError("sequence.delta_tau must be >= 0");
  if (!(noise.bandwidth_hz > 0.0)) throw ValidationError("noise.bandwidth_hz must be > 0");
  if (analysis.trials < 1) throw ValidationError("analysis.trials must be >= 1");
  if (!(analysis.f_min_hz > 0.0) || !(analysis.f_max_hz > analysis.f_min_hz)) {
    throw ValidationError("analysis.f_min_hz must be > 0 and below analysis.f_max_hz");
  }
  if (analysis.points < 2) throw ValidationError("analysis.points must be >= 2");
  if (!(analysis.delta_phi >= 0.0)) throw ValidationError("analysis.delta_phi must be >= 0");
  if (!(analysis.target_h > 0.0)) throw ValidationError("analysis.target_h must be > 0");
  if (!(analysis.budget_frequency_hz > 0.0)) throw ValidationError("analysis.budget_frequency_hz must be > 0");
  if (!(analysis.temperature_k > 0.0)) throw ValidationError("analysis.temperature_k must be > 0");
  if (!(analysis.contrast >= 0.0 && analysis.contrast <= 1.0)) {
    throw ValidationError("analysis.contrast must lie in [0, 1]");
  }
  if (!(analysis.ellipse_delta_phi >= 0.0 && analysis.ellipse_delta_phi <= std::numbers::pi)) {
    throw ValidationError("analysis.ellipse_delta_phi must lie in [0, pi]");
  }
  if (analysis.ellipse_samples < 6) throw ValidationError("analysis.ellipse_samples must be >= 6");
  if (!(analysis.ellipse_readout_noise >= 0.0)) throw ValidationError("analysis.ellipse_readout_noise must be >= 0");
  (void)build_sequence();
}

/// Key order of emitted scenarios.
inline std::vector<std::string> scenario_keys() {
  std::vector<std::string> keys;
  for (const auto& f : detail::scenario_fields()) keys.push_back(f.key);
  return keys;
}

/// Assigns one key from its text form; throws ValidationError on unknown keys or bad values.
inline void set_scenario_value(Scenario& s, std::string_view key, std::string_view value) {
  const auto* f = detail::find_field(key);
  if (!f) throw ValidationError("unknown scenario key '" + std::string(key) + "'");
  f->set(s, value);
}

inline std::string get_scenario_value(const Scenario& s, std::string_view key) {
  const auto* f = detail::find_field(key);
  if (!f) throw ValidationError("unknown scenario key '" + std::string(key) + "'");
  return f->get(s);
}

/*!
  Flat `namespace.key = value` lines. `#` starts a comment, blank lines are
  ignored, keys missing from the file keep their defaults (the strontium
  scenario). Every key may appear at most once.
*/
inline Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::map<std::string, int, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = io::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const auto key = io::trim(line.substr(0, eq));
    const auto value = io::trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (auto it = seen.find(key); it != seen.end()) {
      throw ParseError(line_no, "duplicate key '" + std::string(key) + "' (first on line " +
                                    std::to_string(it->second) + ")");
    }
    seen.emplace(std::string(key), line_no);
    const auto* f = detail::find_field(key);
    if (!f) throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    try {
      f->set(s, value);
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  s.validate();
  return s;
}

/// Every key in canonical order; optional keys are omitted when unset.
inline std::string emit_scenario(const Scenario& s) {
  std::ostringstream out;
  for (const auto& f : detail::scenario_fields()) {
    const std::string v = f.get(s);
    if (v.empty() && (f.key == "noise.seed" || f.key == "analysis.sweep")) continue;
    out << f.key << " = " << v;
    if (!f.unit.empty() && f.unit != "1") out << "  # " << f.unit;
    out << '\n';
  }
  return out.str();
}

inline bool operator==(const Scenario& a, const Scenario& b) {
  for (const auto& f : detail::scenario_fields()) {
    if (f.get(a) != f.get(b)) return false;
  }
  return true;
}

inline std::uint64_t scenario_digest(const Scenario& s) { return io::fnv1a64(emit_scenario(s)); }

}  // namespace atomgw
