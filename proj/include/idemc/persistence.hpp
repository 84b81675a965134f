#pragma once

#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "idemc/config.hpp"
#include "idemc/ladder.hpp"

namespace idemc {

/// x1..xd then I (one wave) or I1..Im.
std::string csv_header(std::size_t dimension, std::size_t waves);
void write_csv_row(std::ostream& out, const Eigen::VectorXd& x, const ImplausibilityVector& v);
void write_samples_csv(const std::string& path, const SampleSet& samples, std::size_t dimension,
                       std::size_t waves);

/// Ladder rows, realized ratios, cluster models and chromosome states, at
/// full precision. Unbounded cutoffs are stored as null.
nlohmann::json ladder_to_json(const BurnInResult& burn_in, const std::string& problem);
/// Rebuilds the burn-in state; kernels are constructed from `config`.
BurnInResult ladder_from_json(const nlohmann::json& doc, const Membership& membership,
                              const LadderConfig& config);

void save_ladder(const std::string& path, const BurnInResult& burn_in, const std::string& problem);
BurnInResult load_ladder(const std::string& path, const Membership& membership,
                         const LadderConfig& config);

/// Acceptance rates and counters of one phase.
nlohmann::json phase_to_json(const PhaseStats& stats);
nlohmann::json ladder_summary(const Ladder& ladder);
nlohmann::json config_echo(const RunConfig& config);

void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace idemc
