#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atomgw/ellipse_fit.hpp"
#include "atomgw/error.hpp"
#include "atomgw/io/format.hpp"
#include "atomgw/noise.hpp"
#include "atomgw/phase_engine.hpp"
#include "atomgw/scenario.hpp"
#include "atomgw/sensitivity.hpp"

namespace atomgw {

inline constexpr std::string_view version = "0.1.0";

enum class Command { simulate, differential, noise_budget, sensitivity, ellipse, sweep, cancellation };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::differential: return "differential";
    case Command::noise_budget: return "noise-budget";
    case Command::sensitivity: return "sensitivity";
    case Command::ellipse: return "ellipse";
    case Command::sweep: return "sweep";
    case Command::cancellation: return "cancellation";
  }
  return "?";
}

inline Command parse_command(std::string_view name) {
  for (auto c : {Command::simulate, Command::differential, Command::noise_budget, Command::sensitivity,
                 Command::ellipse, Command::sweep, Command::cancellation}) {
    if (name == to_string(c)) return c;
  }
  throw ValidationError("unknown command '" + std::string(name) + "'");
}

struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> row_keys;  // record-format keys; empty means name.<index>
  std::vector<std::vector<std::string>> rows;
};

struct RunRecord {
  Command command = Command::simulate;
  std::uint64_t digest = 0;
  std::optional<std::uint64_t> seed;
  std::string tool_version{version};
  std::string timestamp;  // filled by the caller; only written to the manifest
  std::vector<std::pair<std::string, std::string>> scalars;
  std::vector<ResultTable> tables;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides noise.seed
  std::string sweep;                  // overrides analysis.sweep
};

struct SweepSpec {
  std::string key;
  double start = 0.0;
  double stop = 0.0;
  int steps = 0;

  std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
      v[static_cast<std::size_t>(i)] = steps == 1 ? start : start + (stop - start) * i / (steps - 1);
    }
    return v;
  }
};

/// `key=start:stop:steps`, steps >= 1, key must be a scenario key.
inline SweepSpec parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ValidationError("sweep must look like key=start:stop:steps");
  SweepSpec s;
  s.key = std::string(io::trim(text.substr(0, eq)));
  const auto range = text.substr(eq + 1);
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : range.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw ValidationError("sweep must look like key=start:stop:steps");
  if (!io::parse_double(io::trim(range.substr(0, c1)), s.start) ||
      !io::parse_double(io::trim(range.substr(c1 + 1, c2 - c1 - 1)), s.stop) ||
      !io::parse_integer(io::trim(range.substr(c2 + 1)), s.steps)) {
    throw ValidationError("sweep range must be numeric start:stop:steps");
  }
  if (s.steps < 1) throw ValidationError("sweep steps must be >= 1");
  if (s.key == "analysis.sweep") throw ValidationError("cannot sweep analysis.sweep");
  (void)get_scenario_value(Scenario{}, s.key);
  return s;
}

inline bool is_stochastic(Command c, const Scenario& s) {
  if (c == Command::cancellation || c == Command::ellipse) return true;
  if (c == Command::simulate || c == Command::differential || c == Command::sweep) return !s.noise.config.is_zero();
  return false;
}

namespace detail {

inline std::string fmt(double x) { return io::format_double(x); }

inline void add(RunRecord& r, std::string key, double v) { r.scalars.emplace_back(std::move(key), fmt(v)); }
inline void add(RunRecord& r, std::string key, std::string v) { r.scalars.emplace_back(std::move(key), std::move(v)); }

inline double relative_error(double simulated, double analytic) {
  if (analytic == 0.0) return simulated == 0.0 ? 0.0 : INFINITY;
  return std::abs(simulated - analytic) / std::abs(analytic);
}

inline double analytic_phase(const Scenario& s) {
  return differential_phase_analytic(s.sequence.N, s.atom.omega_a, s.gw.h, s.geometry.x1, s.geometry.x2,
                                     s.gw.omega, s.sequence.T, s.gw.phi0);
}

/// Differential run of one scenario, applying one noise realization when noise is configured.
inline DifferentialResult differential_run(const Scenario& s, std::optional<std::uint64_t> seed) {
  const auto seq = s.build_sequence();
  const auto opts = s.engine_options();
  if (s.noise.config.is_zero()) return run_differential(seq, s.geometry, s.atom, s.gw, s.environment, opts);
  NoiseConfig cfg = s.noise.config;
  cfg.seed = *seed;
  const auto noisy = apply_noise(seq, realize_noise(cfg, seq, s.noise.bandwidth_hz));
  return run_differential(noisy.sequence, s.geometry, s.atom, s.gw, s.environment, noisy.platforms, opts);
}

inline void run_simulate(const Scenario& s, std::optional<std::uint64_t> seed, RunRecord& r) {
  const auto seq = s.build_sequence();
  const AtomStart start{s.geometry.x1, 0.0};
  InterferometerResult res;
  if (s.noise.config.is_zero()) {
    res = run_interferometer(seq, start, s.atom, s.gw, s.environment, s.engine_options());
  } else {
    NoiseConfig cfg = s.noise.config;
    cfg.seed = *seed;
    const auto noisy = apply_noise(seq, realize_noise(cfg, seq, s.noise.bandwidth_hz));
    res = run_interferometer(noisy.sequence, start, s.atom, s.gw, s.environment, noisy.platforms,
                             s.engine_options());
  }
  add(r, "mode", std::string(to_string(res.mode)));
  add(r, "delta_phi_single", res.delta_phi_single);
  add(r, "ledger.internal", res.ledger.internal);
  add(r, "ledger.kinetic", res.ledger.kinetic);
  add(r, "ledger.laser", res.ledger.laser);
  add(r, "ledger.separation", res.ledger.separation);
  add(r, "ledger.total", res.ledger.total);
  add(r, "residence_ground_arm", res.residence_ground_arm);
  add(r, "residence_excited_arm", res.residence_excited_arm);
  add(r, "closure.dx", res.closure.dx);
  add(r, "closure.dv", res.closure.dv);
  add(r, "end_time", res.end_time);
  add(r, "p_ground", res.p_ground);
  add(r, "p_excited", res.p_excited);

  ResultTable t{"vertices", {"arm", "pulse_index", "t", "x", "imprinted_phase", "sign"}, {}, {}};
  for (const auto* arm : {&res.ground_arm, &res.excited_arm}) {
    const char* name = arm == &res.ground_arm ? "ground_arm" : "excited_arm";
    for (const auto& v : arm->vertices) {
      t.rows.push_back({name, std::to_string(v.pulse_index), fmt(v.t), fmt(v.x), fmt(v.imprinted_phase),
                        std::to_string(v.sign)});
    }
  }
  r.tables.push_back(std::move(t));
}

inline void run_differential_command(const Scenario& s, std::optional<std::uint64_t> seed, RunRecord& r) {
  const auto res = differential_run(s, seed);
  const double analytic = analytic_phase(s);
  add(r, "mode", std::string(to_string(s.analysis.mode)));
  ResultTable t{"differential",
                {"delta_phi_simulated", "delta_phi_analytic", "relative_error", "phi_first", "phi_second"},
                {},
                {}};
  t.rows.push_back({fmt(res.delta_phi), fmt(analytic), fmt(relative_error(res.delta_phi, analytic)),
                    fmt(res.first.delta_phi_single), fmt(res.second.delta_phi_single)});
  r.tables.push_back(std::move(t));
}

inline void run_budget(const Scenario& s, RunRecord& r) {
  BudgetScenario b;
  b.N = s.sequence.N;
  b.L = s.geometry.L;
  b.T = s.sequence.T;
  b.delta_v = s.geometry.delta_v;
  b.delta_tau = s.sequence.delta_tau;
  b.frequency_hz = s.analysis.budget_frequency_hz;
  b.omega_a = s.atom.omega_a;
  b.mass = s.atom.mass;
  ResultTable t{"budget", {"term", "phase_noise", "requirement", "unit", "exponent"}, {}, {}};
  for (const auto& row : budget_report(b, s.analysis.target_h)) {
    t.row_keys.push_back("term" + std::to_string(row.term));
    t.rows.push_back({std::to_string(row.term), fmt(row.phase_noise), fmt(row.requirement), row.unit,
                      std::to_string(row.exponent)});
  }
  r.tables.push_back(std::move(t));
  add(r, "blackbody_requirement_k",
      blackbody_requirement(s.atom, s.analysis.temperature_k, s.analysis.target_h,
                            BlackbodyScenario{s.sequence.N, s.geometry.L}));
}

inline void run_sensitivity(const Scenario& s, RunRecord& r) {
  SensitivityConfig cfg;
  cfg.delta_phi = s.analysis.delta_phi;
  cfg.frequencies_hz = log_frequency_grid(s.analysis.f_min_hz, s.analysis.f_max_hz, s.analysis.points);
  cfg.N = s.sequence.N;
  cfg.T = s.sequence.T;
  cfg.L = s.geometry.L;
  cfg.omega_a = s.atom.omega_a;
  cfg.corner_locked = s.analysis.corner_locked;
  ResultTable t{"sensitivity", {"frequency_hz", "h_asd"}, {}, {}};
  for (const auto& p : strain_sensitivity_curve(cfg)) t.rows.push_back({fmt(p.frequency_hz), fmt(p.h_asd)});
  r.tables.push_back(std::move(t));
}

inline void run_ellipse(const Scenario& s, std::uint64_t seed, RunRecord& r) {
  std::mt19937_64 rng(seed);
  const auto samples = synthesize_ellipse_samples(
      {s.analysis.ellipse_delta_phi, s.analysis.ellipse_samples, s.analysis.contrast, s.analysis.ellipse_readout_noise},
      rng);
  const auto fit = ellipse_fit(samples);
  add(r, "delta_phi_injected", s.analysis.ellipse_delta_phi);
  add(r, "delta_phi", fit.delta_phi);
  add(r, "residual", fit.residual);
  add(r, "center_x", fit.center_x);
  add(r, "center_y", fit.center_y);
  add(r, "semi_major", fit.semi_major);
  add(r, "semi_minor", fit.semi_minor);
  add(r, "tilt", fit.tilt);
  ResultTable t{"samples", {"p1", "p2"}, {}, {}};
  for (const auto& p : samples) t.rows.push_back({fmt(p.p1), fmt(p.p2)});
  r.tables.push_back(std::move(t));
}

inline bool is_integer_text(std::string_view v) { return v.find_first_of(".eEn") == std::string_view::npos; }

inline void run_sweep(const Scenario& s, const std::string& spec_text, std::optional<std::uint64_t> seed,
                      RunRecord& r) {
  if (spec_text.empty()) throw ValidationError("sweep needs --sweep key=start:stop:steps or analysis.sweep");
  const auto spec = parse_sweep(spec_text);
  const bool integral = is_integer_text(get_scenario_value(s, spec.key));
  add(r, "sweep.key", spec.key);
  ResultTable t{"sweep", {spec.key, "delta_phi_simulated", "delta_phi_analytic", "relative_error"}, {}, {}};
  const auto values = spec.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    Scenario point = s;
    const std::string text =
        integral ? std::to_string(static_cast<long long>(std::llround(values[i]))) : fmt(values[i]);
    set_scenario_value(point, spec.key, text);
    point.validate();
    std::optional<std::uint64_t> point_seed;
    if (seed) point_seed = trial_seed(*seed, i);
    const auto res = differential_run(point, point_seed);
    const double analytic = analytic_phase(point);
    t.rows.push_back({text, fmt(res.delta_phi), fmt(analytic), fmt(relative_error(res.delta_phi, analytic))});
  }
  r.tables.push_back(std::move(t));
}

inline void run_cancellation(const Scenario& s, std::uint64_t seed, RunRecord& r) {
  NoiseConfig cfg = s.noise.config;
  cfg.seed = seed;
  const auto stats = cancellation_experiment(s.build_sequence(), s.geometry, s.atom, s.gw, s.environment, cfg,
                                             s.analysis.trials, s.noise.bandwidth_hz, s.engine_options());
  add(r, "trials", std::to_string(s.analysis.trials));
  add(r, "differential.mean", stats.differential.mean);
  add(r, "differential.std", stats.differential.stddev);
  add(r, "single_first.mean", stats.single_first.mean);
  add(r, "single_first.std", stats.single_first.stddev);
  add(r, "single_second.mean", stats.single_second.mean);
  add(r, "single_second.std", stats.single_second.stddev);
  ResultTable t{"trials", {"trial", "delta_phi"}, {}, {}};
  for (std::size_t i = 0; i < stats.differential_samples.size(); ++i) {
    t.rows.push_back({std::to_string(i), fmt(stats.differential_samples[i])});
  }
  r.tables.push_back(std::move(t));
}

}  // namespace detail

/// Dispatches one command. Module errors are rethrown with the command name prefixed.
inline RunRecord run_scenario(const Scenario& scenario, Command command, const RunOptions& options = {}) {
  RunRecord r;
  r.command = command;
  r.digest = scenario_digest(scenario);
  r.seed = options.seed ? options.seed : scenario.noise.seed;
  if (is_stochastic(command, scenario) && !r.seed) {
    throw ValidationError(std::string(to_string(command)) + " is stochastic and needs a seed (--seed or noise.seed)");
  }
  const std::string context = std::string(to_string(command)) + ": ";
  try {
    switch (command) {
      case Command::simulate: detail::run_simulate(scenario, r.seed, r); break;
      case Command::differential: detail::run_differential_command(scenario, r.seed, r); break;
      case Command::noise_budget: detail::run_budget(scenario, r); break;
      case Command::sensitivity: detail::run_sensitivity(scenario, r); break;
      case Command::ellipse: detail::run_ellipse(scenario, *r.seed, r); break;
      case Command::sweep:
        detail::run_sweep(scenario, options.sweep.empty() ? scenario.analysis.sweep : options.sweep, r.seed, r);
        break;
      case Command::cancellation: detail::run_cancellation(scenario, *r.seed, r); break;
    }
  } catch (const ValidationError& e) {
    throw ValidationError(context + e.what());
  } catch (const SimulationError& e) {
    throw SimulationError(context + e.what());
  }
  return r;
}

enum class OutputFormat { csv, record };

inline OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "record") return OutputFormat::record;
  throw ValidationError("unknown format '" + std::string(name) + "' (csv or record)");
}

inline std::string render_csv(const ResultTable& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

inline std::string render_summary_csv(const RunRecord& r) {
  std::ostringstream out;
  out << "key,value\n";
  for (const auto& [k, v] : r.scalars) out << k << ',' << v << '\n';
  return out.str();
}

/// Flat `key = value` results; tables become `row_key.column` or `table.index.column`.
inline std::string render_record(const RunRecord& r) {
  std::ostringstream out;
  out << "command = " << to_string(r.command) << '\n';
  for (const auto& [k, v] : r.scalars) out << k << " = " << v << '\n';
  for (const auto& t : r.tables) {
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const std::string prefix = i < t.row_keys.size() ? t.row_keys[i] : t.name + "." + std::to_string(i);
      for (std::size_t c = 0; c < t.columns.size() && c < t.rows[i].size(); ++c) {
        out << prefix << '.' << t.columns[c] << " = " << t.rows[i][c] << '\n';
      }
    }
  }
  return out.str();
}

inline std::string render_manifest(const RunRecord& r, const std::vector<std::string>& files) {
  std::ostringstream out;
  out << "command = " << to_string(r.command) << '\n';
  out << "scenario_digest = " << io::hex64(r.digest) << '\n';
  out << "seed = " << (r.seed ? std::to_string(*r.seed) : std::string("none")) << '\n';
  out << "version = " << r.tool_version << '\n';
  out << "timestamp = " << r.timestamp << '\n';
  for (std::size_t i = 0; i < files.size(); ++i) out << "file." << i << " = " << files[i] << '\n';
  return out.str();
}

/// Writes the results files plus manifest.record into `dir`; returns the results file names.
inline std::vector<std::string> emit_results(const RunRecord& r, OutputFormat format,
                                             const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw SimulationError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::pair<std::string, std::string>> files;
  if (format == OutputFormat::csv) {
    if (!r.scalars.empty()) files.emplace_back("summary.csv", render_summary_csv(r));
    for (const auto& t : r.tables) files.emplace_back(t.name + ".csv", render_csv(t));
  } else {
    files.emplace_back("results.record", render_record(r));
  }
  std::vector<std::string> names;
  auto write = [&dir](const std::string& name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << body;
    if (!f) throw SimulationError("cannot write '" + (dir / name).string() + "'");
  };
  for (const auto& [name, body] : files) {
    write(name, body);
    names.push_back(name);
  }
  write("manifest.record", render_manifest(r, names));
  return names;
}

}  // namespace atomgw
