// atomgw command-line runner.
//
//   atomgw <command> --scenario <file> [--seed n] [--out dir] [--format csv|record] [--sweep key=a:b:n]
//
// Exit codes: 0 success, 1 validation or usage error, 2 runtime error.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "atomgw/run.hpp"

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw atomgw::ValidationError("cannot read scenario '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atomic clock gravitational-wave detector simulator"};
  app.set_version_flag("--version", std::string(atomgw::version));

  std::string command;
  std::string scenario_path;
  std::string out_dir = "out";
  std::string format = "csv";
  std::string sweep;
  std::uint64_t seed = 0;

  app.add_option("command", command,
                 "simulate | differential | noise-budget | sensitivity | ellipse | sweep | cancellation")
      ->required();
  app.add_option("--scenario", scenario_path, "Scenario file (flat key = value)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed; overrides noise.seed");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", format, "csv or record")->capture_default_str();
  app.add_option("--sweep", sweep, "key=start:stop:steps; overrides analysis.sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cmd = atomgw::parse_command(command);
    const auto fmt = atomgw::parse_format(format);
    const auto scenario = atomgw::parse_scenario(read_file(scenario_path));
    atomgw::RunOptions opts;
    if (seed_opt->count() > 0) opts.seed = seed;
    opts.sweep = sweep;
    auto record = atomgw::run_scenario(scenario, cmd, opts);
    record.timestamp = utc_timestamp();
    for (const auto& name : atomgw::emit_results(record, fmt, out_dir)) std::cout << out_dir << '/' << name << '\n';
    return 0;
  } catch (const atomgw::ValidationError& e) {
    std::cerr << "error: " << scenario_path << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
