#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "idemc/config.hpp"
#include "idemc/ladder.hpp"

namespace idemc {

struct TraceRow {
  std::size_t retained;
  std::size_t level;
  Eigen::VectorXd x;
  ImplausibilityVector values;
};

struct SamplingOutcome {
  /// Chromosome n every T-th iteration; exactly N points.
  SampleSet target;
  /// Every chromosome every T-th iteration, index = level.
  std::vector<SampleSet> levels;
  std::vector<TraceRow> trace;
  PhaseStats stats;
};

/// Runs N·T sampling iterations from a finished burn-in.
SamplingOutcome sample_phase(const Membership& membership, BurnInResult& burn_in,
                             const RunConfig& config);

struct CommandOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  /// `run` only: resume from this ladder file instead of burning in.
  std::string ladder;
};

/// Exit status 0 on success, 2 for an infeasible or possibly empty target,
/// 1 for any other failure. Failures print a one-line JSON record to `err`.
int cmd_run(const CommandOptions& options, std::ostream& log, std::ostream& err);
int cmd_ladder(const CommandOptions& options, std::ostream& log, std::ostream& err);
int cmd_eff(const CommandOptions& options, std::ostream& log, std::ostream& err);
int cmd_oracle(const CommandOptions& options, std::ostream& log, std::ostream& err);

}  // namespace idemc
