#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spde/grid.hpp"
#include "spde/kernel.hpp"
#include "spde/models.hpp"
#include "spde/rare_event.hpp"
#include "spde/rate.hpp"
#include "spde/solver.hpp"

namespace spde {

/// Flat key/value text. Lines are `key = value`; a line `[section]` prefixes
/// the following keys with `section.`; `#` starts a comment.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);

/// Every setting a subcommand can read. Defaults reproduce the linear heat
/// oracle case on the (63, 200) grid.
struct RunConfig {
  GridSpec grid;
  PresetId preset = PresetId::linear_heat;
  PresetParams preset_params;
  SolveConfig solve;

  // eta = initial_amplitude * sin(initial_mode pi x), or initial_values verbatim.
  double initial_amplitude = 0.0;
  int initial_mode = 1;
  std::vector<double> initial_values;

  // Control: "zero", "sine" (amplitude sin(pi t) sin(pi x)) or "constant".
  std::string control_kind = "zero";
  double control_amplitude = 1.0;

  // Event and rate target share the profile sqrt(2) sin(mode pi x).
  std::string event_kind = "terminal_projection";
  double event_level = 0.3;
  int profile_mode = 1;
  double target_tolerance = 1e-6;
  // rate-eval path: "skeleton" (skeleton of the control) or "t_sine" (h = t sin(pi x)).
  std::string rate_path = "skeleton";
  OptimizerSettings optimizer;

  long samples = 100000;
  std::string method = "plain";
  double max_excluded_fraction = 1e-3;

  std::vector<double> epsilons{0.05, 0.02, 0.01};
  std::string policy = "tilted";

  std::vector<int> a1_n{4, 8, 16, 32, 64};
  double a1_amplitude = 1.0;

  int a2_seeds = 20;
  std::string a2_family = "fixed";

  kernel::BoundSampling kernel_sampling;
  int kernel_nx = 256;

  std::uint64_t seed = 12345;
  int threads = 0;
  std::string out = "out";

  /// Applies key/value pairs; ValidationError on unknown keys or bad values.
  void apply(const KeyValues& kv);
  /// Cross-field checks run before any computation.
  void validate() const;

  /// Canonical `key = value` dump, one line per key in sorted order.
  std::string canonical() const;

  std::vector<double> eta() const;
  Coefficients coefficients() const;
  Control control() const;
  std::vector<double> profile() const;
  EventSpec event() const;
  TargetSpec target() const;
  MCOptions mc_options() const;
};

RunConfig load_config(const std::string& path);

}  // namespace spde
