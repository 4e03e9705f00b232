#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/econ.hpp"
#include "elicit/harness/experiment.hpp"
#include "elicit/methods.hpp"

namespace elicit::harness {

/// A fully resolved experiment definition. See docs/config.md for the file
/// schema; every field has a default except the `task` section, which must be
/// present.
struct ExperimentConfig {
  ExperimentSetup setup;
  std::string weak_preset;  // empty when the weak annotator is given explicitly
  SweepGrid grid;
  std::vector<MethodSpec> methods;
  LearnerConfig learner;
  double val_fraction = 0.2;
  std::size_t min_val = 4;
  std::filesystem::path output_dir = "out";

  /// Checks every child invariant and cross-section constraint.
  void validate() const;

  /// Allocation for one cell with the configured validation split.
  Allocation allocation(Currency budget, double rho) const;
};

/// Parses a JSON document. Unknown keys and malformed values raise
/// ValidationError naming the dotted field path.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON rendering (sorted keys, every default spelled out). Parsing
/// the result yields an identical config.
std::string canonical_json(const ExperimentConfig& config);

/// Hex digest of the canonical rendering with `output_dir` left out, so moving
/// a run directory does not change its identity.
std::string config_hash(const ExperimentConfig& config);

}  // namespace elicit::harness
