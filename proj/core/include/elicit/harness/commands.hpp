#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "elicit/harness/sweep.hpp"

namespace elicit::harness {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int validation = 2;
inline constexpr int partial_failure = 3;
}  // namespace exit_code

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides the config's output_dir
  std::optional<std::size_t> workers;        // default_workers() when unset
  bool resume = false;
  std::optional<std::size_t> max_jobs;
  std::function<bool(const Job&)> inject_failure;
};

/// Runs `generate`, `sweep`, `report`, `pareto` or `regimes` and returns the
/// process exit code. Human-readable output goes to `out`, errors to `err`.
int run_command(std::string_view command, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace elicit::harness
