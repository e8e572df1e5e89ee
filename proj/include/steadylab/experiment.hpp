#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "steadylab/config.hpp"

namespace steadylab {

inline constexpr const char* kToolVersion = "steadylab 1.0.0";

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

/// A file to be written below the output directory.
struct OutputRecord {
  std::string path;  // relative, '/' separated
  std::string bytes;
};

struct Artifact {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string tool_version = kToolVersion;
  std::map<std::string, std::string> config;
  std::string started;
  std::string finished;
  std::vector<CheckResult> checks;
  std::vector<Artifact> artifacts;
  /// SHA-256 over "path sha256\n" for every artifact in path order.
  std::string digest;
  std::vector<std::string> warnings;
  /// Command-specific scalars, also written to summary.json.
  nlohmann::json summary = nlohmann::json::object();
  std::string error;

  bool passed() const;
  nlohmann::json to_json() const;
};

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Writes every record below out_dir (creating directories) and returns a
/// manifest listing them with digests. Throws IoError with the failing path.
RunManifest write_outputs(const std::vector<OutputRecord>& records,
                          const std::filesystem::path& out_dir);

/// Runs one of build-steady, decay, stability, verify-bounds, sweep and writes
/// its artifacts plus manifest.json into out_dir. Module errors propagate,
/// except inside a sweep where they become failure rows.
RunManifest run_command(const std::string& command, const ExperimentConfig& cfg,
                        const std::filesystem::path& out_dir, int workers = 1);

/// The single-object summary printed by the command-line tool.
nlohmann::json stdout_summary(const RunManifest& manifest, const std::filesystem::path& out_dir);

/// Slope of log y against log x by least squares.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace steadylab
