#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "polsar/assessment.hpp"

namespace polsar::cli {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// A parsed scenario file: the scene plus Monte Carlo settings, with
/// defaults filled in.
struct RunConfig {
  Scenario scenario;
  int looks = 49;
  int trials = 1000;
  std::uint64_t seed = 1;
  FitOptions fit;
  bool start_seed_given = false;
  /// Human-readable notes about applied defaults (echoed into meta.json).
  std::vector<std::string> notices;
};

/// Parses scenario JSON. Unknown keys are rejected; errors carry the key
/// path and, where it can be located, `source:line`.
[[nodiscard]] RunConfig parse_scenario_text(const std::string& text,
                                            const std::string& source = "<scenario>");
/// Reads and parses a scenario file; unreadable files raise IoError.
[[nodiscard]] RunConfig parse_scenario(const std::filesystem::path& path);

/// Matrix files: JSON object with t11, t22, t33, t12_re, t12_im, t13_re,
/// t13_im, t23_re, t23_im. Doubles are written with round-trip precision.
[[nodiscard]] CoherencyMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const CoherencyMatrix& t);

/// CSV number format: 9 significant digits, C locale.
[[nodiscard]] std::string format_number(double v);

/// "a:b:step" with b included (within rounding).
[[nodiscard]] std::vector<double> parse_grid(const std::string& spec);

/// Runs the tool. `args` excludes the program name. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polsar::cli
