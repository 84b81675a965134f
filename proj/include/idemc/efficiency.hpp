#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

namespace idemc {

/// Inputs of the evaluation-count model. Costs are counted in implausibility
/// evaluations.
struct CostParams {
  double N = 1e4;
  double T = 10;
  /// Target volume relative to the box.
  double V_T = 1e-3;
  double p = 0.4;
  double s = 2000;
  double s_n = 5000;
  double M = 10;
  double pm_burn = 0.9;
  double pm_samp = 0.9;
  /// Overrides the chromosome count implied by V_T and p.
  std::optional<std::size_t> chromosomes;

  void validate() const;
};

/// E[N_r] = N / V_T
double expected_evals_rejection(double N, double V_T);

/// 1 + ⌈log V_T / log p⌉
std::size_t expected_chromosomes(double V_T, double p);

/// Expected evaluations for burn-in plus N·T sampling iterations.
double expected_evals_idemc(const CostParams& params);

/// Evaluations of the sampling phase alone: N·T·(p_m(M(n-1)+1) + (1-p_m)(n+1)).
double expected_sampling_evals(double iterations, double M, double pm, std::size_t chromosomes);

struct CostRow {
  double V_T;
  std::size_t chromosomes;
  double rejection;
  double idemc;
};

std::vector<CostRow> cost_table(const CostParams& params, const std::vector<double>& volumes);
void write_cost_table(std::ostream& out, const std::vector<CostRow>& rows);

/// log-spaced grid from `lo` to `hi` with `per_decade` points per factor of 10.
std::vector<double> log_grid(double lo, double hi, std::size_t per_decade);

/// Largest V_T in [lo, hi] (to relative precision 1e-9) where rejection is at
/// least as expensive as IDEMC. Both costs fall as V_T grows, rejection faster.
double cost_crossover(const CostParams& params, double lo = 1e-12, double hi = 1.0);

}  // namespace idemc
