#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "steadylab/field.hpp"
#include "steadylab/linear_evolution.hpp"
#include "steadylab/steady_builder.hpp"

namespace steadylab {

struct StabilityOptions {
  double alpha = 4.0;
  double decades = 3.0;
  /// ||w0||_2 as a fraction of ||U||_2.
  double w0_ratio = 0.1;
  double w0_lo = 0.5;
  double w0_hi = 2.0;
  std::uint64_t w0_seed = 11;
  double dt = 1e-3;
  double horizon = 50.0;
  std::vector<std::pair<double, double>> pairs{{0.0, 0.5}, {0.5, 1.0}, {1.0, 2.0},
                                               {0.0, 2.0}, {2.0, 3.0}};
};

struct SweepOptions {
  std::string command = "build-steady";
  std::string key = "forcing.amplitude";
  std::vector<double> values;
};

struct ExperimentConfig {
  int n = 32;
  double period = 1.0;
  double dealias_fraction = 2.0 / 3.0;
  PhysicalParams physics{};
  double rho1 = 5.0;
  double amplitude = 0.3;
  std::uint64_t seed = 7;
  EvolutionConfig evolution{.dt = 5e-3, .horizon = 4.0, .tail_tolerance = 0.0,
                            .snapshot_stride = 4, .cfl = 0.5};

  SteadyRoute route = SteadyRoute::Direct;
  double tol_outer = 1e-10;
  double tol_inner = 1e-12;
  int max_outer = 60;
  int max_inner = 200;

  /// Bootstrap exponents checked by the decay command.
  std::vector<int> bootstrap_m{4};
  double calibration_fraction = 0.1;

  StabilityOptions stability{};

  std::string verify_checkpoint;
  std::string verify_forcing;
  double verify_residual = 1e-8;

  SweepOptions sweep{};

  Lattice lattice() const { return make_lattice(n, period, dealias_fraction); }
  ForcingSpec forcing() const;
  BuildOptions build_options() const;

  /// Every key with its effective value, in key order.
  std::map<std::string, std::string> echo() const;
  /// key = value lines for echo(); parse_config(to_text()) reproduces the config.
  std::string to_text() const;
};

/// Parses flat "section.key = value" lines; '#' starts a comment.
/// Throws ConfigError naming the key for unknown keys (with the closest known
/// key as a suggestion), malformed values, duplicates and violated
/// preconditions of the modules the values feed.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Applies one key = value assignment to an existing config and revalidates.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Sorted list of accepted keys.
std::vector<std::string> config_keys();

/// Closest accepted key to `key`, or empty when nothing is close.
std::string suggest_key(const std::string& key);

}  // namespace steadylab
