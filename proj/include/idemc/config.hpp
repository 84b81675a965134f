#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idemc/ladder.hpp"
#include "idemc/membership.hpp"

namespace idemc {

struct ProblemConfig {
  /// A built-in name, or "external" together with `command`.
  std::string name = "twin_quadratic_2d";
  std::vector<double> cutoffs;
  std::optional<double> gamma;
  std::string command;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct OutputConfig {
  std::size_t N = 1000;
  std::size_t T = 10;
  std::string dir = "idemc_out";
};

struct EffConfig {
  std::optional<double> volume;
  std::optional<std::size_t> chromosomes;
  double grid_lo = 1e-20;
  double grid_hi = 1.0;
  std::size_t per_decade = 10;
};

struct OracleConfig {
  /// "rejection", or "direct" for the built-in ellipsoid problems.
  std::string method = "rejection";
  std::uint64_t max_attempts = 100'000'000;
};

struct RunConfig {
  ProblemConfig problem;
  /// Burn-in settings; ladder.moves carries the burn-in mutation probability.
  LadderConfig ladder;
  /// Mutation probability during sampling.
  double pm_samp = 0.9;
  OutputConfig output;
  EffConfig eff;
  OracleConfig oracle;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  /// Move settings used after burn-in.
  MoveConfig sampling_moves() const;
};

/// Parses `section.key = value` lines; '#' starts a comment. Unknown or
/// repeated keys and bad values raise ParseError naming the key and line.
RunConfig parse_config(std::string_view text);
/// Reads and parses a file. A missing file raises ParseError with line 0.
RunConfig load_config(const std::string& path);

/// Every key with its effective value, defaults included, in a fixed order.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config);

/// The membership rule a config describes (built-in or external process).
Membership make_membership(const ProblemConfig& problem);

}  // namespace idemc
