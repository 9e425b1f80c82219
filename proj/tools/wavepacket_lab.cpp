// wavepacket-lab: run or dry-run a wavepacket scenario described by a JSON config.

#include <CLI11.hpp>

#include <iostream>

#include "wavepacket/scenario.hpp"
#include "wavepacket/spectral.hpp"

namespace {

using wpl::cli::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int do_verify(const std::string& config) {
  const auto scenario = wpl::cli::load_scenario(config);
  const auto report = wpl::cli::verify(scenario);
  print_warnings(report.warnings);
  const auto& g = report.grid;
  std::cout << "ok: " << wpl::family_name(scenario.spec) << ", " << scenario.times.size() << " times up to t="
            << wpl::cli::format_number(g.t_max) << "\n"
            << "grid: n=" << g.points << " (required " << g.required_points << "), span ["
            << wpl::cli::format_number(g.xmin) << ", " << wpl::cli::format_number(g.xmax) << "]\n";
  return code(ExitCode::success);
}

int do_run(const std::string& config, const std::string& out, bool oracle, std::optional<std::size_t> grid_n) {
  const auto scenario = wpl::cli::load_scenario(config);
  wpl::cli::RunOptions options;
  options.force_oracle = oracle;
  options.grid_points = grid_n;
  options.threads = wpl::cli::threads_from_environment();
  const auto manifest = wpl::cli::run(scenario, out, options);
  print_warnings(manifest.warnings);
  std::cout << "wrote " << manifest.files.size() << " files to " << out << "\n";
  for (const auto& d : manifest.oracle) {
    std::cout << (d.passed() ? "oracle ok   " : "oracle FAIL ") << d.quantity
              << ": max deviation " << wpl::cli::format_number(d.max_deviation) << " (tolerance "
              << wpl::cli::format_number(d.tolerance) << ")\n";
  }
  return code(manifest.oracle_passed() ? ExitCode::success : ExitCode::oracle);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form Gaussian wavepacket scenarios with a spectral oracle"};
  app.set_version_flag("--version", wpl::cli::kToolVersion);
  app.require_subcommand(1);

  std::string config, out;
  bool oracle = false;
  std::optional<std::size_t> grid_n;

  auto* run = app.add_subcommand("run", "Compute the requested outputs and write them to a directory");
  run->add_option("config", config, "Scenario JSON file")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_flag("--oracle", oracle, "Check analytic moments against the spectral oracle");
  run->add_option("--grid-n", grid_n, "Grid points (power of two, >= 256)");

  auto* check = app.add_subcommand("verify", "Validate a config and report the resolved grid");
  check->add_option("config", config, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::validation);
  }

  try {
    if (*run) return do_run(config, out, oracle, grid_n);
    return do_verify(config);
  } catch (const wpl::cli::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(ExitCode::io);
  } catch (const wpl::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(ExitCode::oracle);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(ExitCode::validation);
  }
}
