#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "idemc/clustering.hpp"
#include "idemc/emc_core.hpp"
#include "idemc/membership.hpp"
#include "idemc/proposals.hpp"

namespace idemc {

struct LadderConfig {
  /// Target volume ratio between adjacent levels.
  double p = 0.4;
  /// Iterations per intermediate rung.
  std::size_t s = 2000;
  /// Iterations after the terminal rung.
  std::size_t s_n = 5000;
  std::size_t max_rungs = 200;
  /// Most samples handed to the clustering of any one level.
  std::size_t cluster_cap = 2000;
  ClusterFitOptions clustering;
  MoveConfig moves;
  KernelKind kernel = KernelKind::Normal;
  double covariance_scale = 1.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const;
};

/// Rows of the implausibility ladder. rows[0] is the unconstrained row and
/// rows.back() equals the target cutoffs; realized_ratios[i] is the fraction
/// of the samples used to set row i+1 that satisfied it.
struct Ladder {
  std::vector<ImplausibilityVector> rows;
  std::vector<double> realized_ratios;
  double p = 0.4;
  std::size_t s = 0;
  std::size_t s_n = 0;

  /// Constrained levels n; the population has n+1 chromosomes.
  std::size_t levels() const { return rows.empty() ? 0 : rows.size() - 1; }
  std::size_t chromosomes() const { return rows.size(); }
  /// Column k of the constrained rows, e.g. b_1..b_n for a single wave.
  std::vector<double> column(std::size_t k) const;
};

struct LevelChoice {
  double level = 0.0;
  bool terminal = false;
};

/// The ⌈p·s⌉-th smallest value, clamped up to `a` (which marks the terminal rung).
LevelChoice choose_next_level(std::span<const double> implausibilities, double p, double a);

struct VolumeEstimate {
  /// Product of the realized ratios.
  double realized = 0.0;
  /// p raised to the number of constrained levels.
  double nominal = 0.0;
};

VolumeEstimate estimate_volume(const Ladder& ladder);

/// Acceptance counters for one phase of a run.
struct PhaseStats {
  std::vector<LevelTally> levels;
  std::vector<MoveTally> exchanges;
  std::uint64_t evaluations = 0;
  std::size_t iterations = 0;
};

struct BurnInResult {
  Ladder ladder;
  Population population;
  std::vector<std::shared_ptr<const ClusterModel>> models;  // models[i-1] for level i
  std::vector<ProposalKernel> kernels;
  PhaseStats stats;
};

/// Kernels for every constrained level from fitted models.
std::vector<ProposalKernel> make_kernels(
    const std::vector<std::shared_ptr<const ClusterModel>>& models, const Membership& membership,
    const LadderConfig& config);

/// Burn-in for any number of waves. Columns tighten in wave order: a column
/// stays unbounded until every earlier column has reached its target cutoff.
/// Throws EmptyRegionError when the rung cap is reached first.
BurnInResult build_multiwave_ladder(const Membership& membership, const LadderConfig& config);

/// Single-wave burn-in; the same procedure with one column.
BurnInResult build_ladder(const Membership& membership, const LadderConfig& config);

}  // namespace idemc
