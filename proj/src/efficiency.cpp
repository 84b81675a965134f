#include "idemc/efficiency.hpp"

#include <cmath>
#include <iomanip>

#include "idemc/errors.hpp"

namespace idemc {

void CostParams::validate() const {
  if (!(N > 0 && T > 0 && s >= 0 && s_n >= 0 && M > 0)) {
    throw ContractError("cost parameters must be positive");
  }
  if (!(p > 0.0 && p < 1.0)) throw ContractError("p must lie in (0, 1)");
  if (!(pm_burn > 0.0 && pm_burn <= 1.0) || !(pm_samp > 0.0 && pm_samp <= 1.0)) {
    throw ContractError("mutation probabilities must lie in (0, 1]");
  }
  if (!chromosomes && !(V_T > 0.0 && V_T <= 1.0)) {
    throw ContractError("V_T must lie in (0, 1]");
  }
  if (chromosomes && *chromosomes < 1) throw ContractError("need at least one chromosome");
}

double expected_evals_rejection(double N, double V_T) {
  if (!(V_T > 0.0)) throw ContractError("V_T must be positive");
  return N / V_T;
}

std::size_t expected_chromosomes(double V_T, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("p must lie in (0, 1)");
  if (!(V_T > 0.0 && V_T <= 1.0)) throw ContractError("V_T must lie in (0, 1]");
  const double ratio = std::log(V_T) / std::log(p);
  // Ratios within rounding of an integer count as that integer.
  const double nearest = std::round(ratio);
  const double steps = std::abs(ratio - nearest) < 1e-9 ? nearest : std::ceil(ratio);
  return 1 + static_cast<std::size_t>(steps);
}

double expected_sampling_evals(double iterations, double M, double pm, std::size_t chromosomes) {
  const double n = static_cast<double>(chromosomes);
  return iterations * (pm * (M * (n - 1.0) + 1.0) + (1.0 - pm) * (n + 1.0));
}

double expected_evals_idemc(const CostParams& params) {
  params.validate();
  const std::size_t n_hat =
      params.chromosomes ? *params.chromosomes : expected_chromosomes(params.V_T, params.p);
  const double n = static_cast<double>(n_hat);
  const double pb = params.pm_burn;
  const double M = params.M;

  double rungs = 1.0;
  for (double k = 2.0; k <= n - 1.0; k += 1.0) {
    rungs += pb * ((k - 1.0) * M + 1.0) + (1.0 - pb) * (k + 1.0);
  }
  const double burn = params.s * rungs;
  const double settle = params.s_n * (pb * ((n - 1.0) * M + 1.0) + (1.0 - pb) * (n + 1.0));
  const double sampling =
      expected_sampling_evals(params.N * params.T, M, params.pm_samp, n_hat);
  return burn + settle + sampling;
}

std::vector<CostRow> cost_table(const CostParams& params, const std::vector<double>& volumes) {
  std::vector<CostRow> rows;
  rows.reserve(volumes.size());
  for (double v : volumes) {
    CostParams at = params;
    at.V_T = v;
    at.chromosomes.reset();
    rows.push_back({v, expected_chromosomes(v, params.p),
                    expected_evals_rejection(params.N, v), expected_evals_idemc(at)});
  }
  return rows;
}

void write_cost_table(std::ostream& out, const std::vector<CostRow>& rows) {
  out << "V_T,chromosomes,rejection,idemc\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.V_T << ',' << r.chromosomes << ',' << r.rejection << ',' << r.idemc << '\n';
  }
}

std::vector<double> log_grid(double lo, double hi, std::size_t per_decade) {
  if (!(lo > 0.0 && hi >= lo) || per_decade < 1) throw ContractError("bad grid bounds");
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  const auto steps = static_cast<std::size_t>(std::ceil((b - a) * static_cast<double>(per_decade)));
  std::vector<double> grid;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = steps == 0 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(steps);
    grid.push_back(std::pow(10.0, t));
  }
  return grid;
}

double cost_crossover(const CostParams& params, double lo, double hi) {
  auto rejection_dearer = [&](double v) {
    CostParams at = params;
    at.V_T = v;
    at.chromosomes.reset();
    return expected_evals_rejection(params.N, v) >= expected_evals_idemc(at);
  };
  if (!rejection_dearer(lo)) return lo;
  if (rejection_dearer(hi)) return hi;
  double a = std::log(lo);
  double b = std::log(hi);
  while (b - a > 1e-9) {
    const double mid = 0.5 * (a + b);
    if (rejection_dearer(std::exp(mid))) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return std::exp(a);
}

}  // namespace idemc
