#pragma once

// Scenario runner behind the wavepacket-lab CLI: a JSON config names a packet
// family, its parameters, the sample times and the outputs to write.

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavepacket/core.hpp"

namespace wpl::cli {

inline constexpr const char* kToolVersion = "wavepacket-lab 1.0.0";

/// Malformed or incomplete configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output directory or file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExitCode : int { success = 0, validation = 1, oracle = 2, io = 3 };

enum class Output { moments, spread, kinetic_split, wigner, wavefunction };

std::string output_name(Output output);

struct GridSettings {
  std::optional<std::size_t> points;  // unset: kDefaultGridPoints
  double padding = kDefaultPadding;
  std::size_t wigner_points = 512;
};

struct Scenario {
  std::string name;
  PacketSpec spec;
  std::vector<double> times;
  std::vector<Output> outputs;
  GridSettings grid;
  bool oracle = false;
  nlohmann::json source;  // the config as read, echoed into the manifest

  bool wants(Output output) const;
};

/// Validates a parsed config document.
Scenario parse_scenario(const nlohmann::json& config);
/// Reads and validates a config file; parse errors carry line and column.
Scenario load_scenario(const std::filesystem::path& path);

struct ResolvedGrid {
  std::size_t points = 0;
  std::size_t required_points = 0;
  double xmin = 0.0;
  double xmax = 0.0;
  double t_max = 0.0;
};

struct VerifyReport {
  ResolvedGrid grid;
  std::vector<std::string> warnings;
};

/// Dry run: resolves the grid and collects warnings without writing files.
VerifyReport verify(const Scenario& scenario);

struct OracleDeviation {
  std::string quantity;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_deviation <= tolerance; }
};

struct RunOptions {
  bool force_oracle = false;
  std::optional<std::size_t> grid_points;
  std::size_t threads = 1;
};

struct RunManifest {
  nlohmann::json scenario;
  ResolvedGrid grid;
  std::string version = kToolVersion;
  std::vector<std::filesystem::path> files;
  std::vector<OracleDeviation> oracle;
  std::vector<std::string> warnings;

  bool oracle_passed() const;
  nlohmann::json to_json() const;
};

/// Computes every requested output and writes it under `out_dir`, together
/// with manifest.json. Throws ConfigError/SpecError/GridError on invalid
/// input and IoError when files cannot be written.
RunManifest run(const Scenario& scenario, const std::filesystem::path& out_dir,
                const RunOptions& options = {});

/// %.17g formatting used for every number written to CSV and Wigner files.
std::string format_number(double value);

/// Parallelism cap from WAVEPACKET_LAB_THREADS (default 1).
std::size_t threads_from_environment();

}  // namespace wpl::cli
