#include "idemc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "idemc/errors.hpp"

namespace idemc {

namespace {

double squared_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).squaredNorm();
}

std::vector<Eigen::VectorXd> seed_centers(std::span<const Eigen::VectorXd> points,
                                          std::size_t k, Rng& rng) {
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(k);
  centers.push_back(points[rng.index(points.size())]);
  std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], centers.back()));
      total += nearest[i];
    }
    if (!(total > 0.0)) {
      centers.push_back(points[rng.index(points.size())]);
      continue;
    }
    double target = rng.uniform() * total;
    std::size_t pick = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      target -= nearest[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(points[pick]);
  }
  return centers;
}

KMeansResult lloyd(std::span<const Eigen::VectorXd> points,
                   std::vector<Eigen::VectorXd> centers, std::size_t max_iterations) {
  const std::size_t k = centers.size();
  KMeansResult result;
  result.labels.assign(points.size(), 0);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points[i], centers[0]);
      for (std::size_t j = 1; j < k; ++j) {
        const double d = squared_distance(points[i], centers[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (result.labels[i] != best) {
        result.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(points[0].size()));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[result.labels[i]] += points[i];
      ++counts[result.labels[i]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      // Empty clusters keep their previous centre.
      if (counts[j] > 0) centers[j] = sums[j] / static_cast<double>(counts[j]);
    }
  }
  result.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.inertia += squared_distance(points[i], centers[result.labels[i]]);
  }
  result.centers = std::move(centers);
  return result;
}

CovarianceFactor regularized(Eigen::MatrixXd cov, double ridge,
                             std::vector<std::string>& warnings) {
  const auto d = cov.rows();
  const double trace = cov.trace();
  double added = ridge * trace / static_cast<double>(d);
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    added = ridge;
    warnings.emplace_back("zero-variance samples; covariance floored by the ridge");
  }
  cov.diagonal().array() += added;
  // Directions that are degenerate relative to the trace still need a floor.
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(cov(i, i) > 0.0)) cov(i, i) = added > 0.0 ? added : ridge;
  }
  try {
    return CovarianceFactor(cov);
  } catch (const ContractError&) {
    warnings.emplace_back("covariance not positive definite; using its diagonal");
    Eigen::MatrixXd diag = cov.diagonal().asDiagonal();
    return CovarianceFactor(diag);
  }
}

}  // namespace

KMeansResult kmeans(std::span<const Eigen::VectorXd> points, std::size_t k,
                    std::size_t restarts, std::size_t max_iterations, Rng& rng) {
  if (points.empty() || k == 0) throw ContractError("k-means needs points and k >= 1");
  k = std::min(k, points.size());
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    auto fit = lloyd(points, seed_centers(points, k, rng), max_iterations);
    if (fit.inertia < best.inertia) best = std::move(fit);
    if (k == 1) break;
  }
  return best;
}

double spherical_bic(std::span<const Eigen::VectorXd> points, const KMeansResult& fit) {
  const double n = static_cast<double>(points.size());
  const double d = static_cast<double>(points[0].size());
  const std::size_t k = fit.centers.size();
  std::vector<double> counts(k, 0.0);
  for (auto label : fit.labels) counts[label] += 1.0;

  const double dof = d * (n - static_cast<double>(k));
  if (!(dof > 0.0)) return std::numeric_limits<double>::infinity();
  const double variance = fit.inertia / dof;
  if (!(variance > 0.0)) return std::numeric_limits<double>::infinity();

  double log_likelihood = -0.5 * n * d * std::log(2.0 * std::numbers::pi * variance) -
                          fit.inertia / (2.0 * variance);
  for (double c : counts) {
    if (c > 0.0) log_likelihood += c * std::log(c / n);
  }
  const double parameters = static_cast<double>(k) * (d + 1.0);
  return -2.0 * log_likelihood + parameters * std::log(n);
}

ClusterModel fit_cluster_model(std::span<const Eigen::VectorXd> samples,
                               const ClusterFitOptions& options) {
  if (samples.size() < 2) throw ContractError("clustering needs at least two samples");
  if (options.max_k < 1) throw ContractError("max_k must be at least 1");
  const std::size_t d = static_cast<std::size_t>(samples[0].size());
  Rng rng(options.seed);

  PointList points(samples.begin(), samples.end());
  const Eigen::VectorXd mean = sample_mean(points);
  std::vector<std::string> warnings;
  CovarianceFactor whole = regularized(sample_covariance(points, mean), options.ridge, warnings);

  KMeansResult chosen = kmeans(samples, 1, 1, options.max_iterations, rng);
  double chosen_bic = spherical_bic(samples, chosen);
  const std::size_t max_k = std::min(options.max_k, samples.size() / 2);
  for (std::size_t k = 2; k <= max_k; ++k) {
    auto fit = kmeans(samples, k, options.restarts, options.max_iterations, rng);
    const double bic = spherical_bic(samples, fit);
    if (bic < chosen_bic) {
      chosen_bic = bic;
      chosen = std::move(fit);
    }
  }

  ClusterModel model{.level = 0,
                     .means = {},
                     .covariances = {},
                     .whole = whole,
                     .omega = options.omega,
                     .warnings = {}};
  std::vector<PointList> members(chosen.centers.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    members[chosen.labels[i]].push_back(samples[i]);
  }
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (members[j].empty()) continue;
    const Eigen::VectorXd mu = sample_mean(members[j]);
    Eigen::MatrixXd cov;
    if (members[j].size() >= d + 2) {
      cov = sample_covariance(members[j], mu);
    } else if (members[j].size() >= 2) {
      cov = sample_covariance(members[j], mu).diagonal().asDiagonal();
    } else {
      cov = whole.covariance().diagonal().asDiagonal();
    }
    model.means.push_back(mu);
    model.covariances.push_back(regularized(std::move(cov), options.ridge, warnings));
  }
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  model.warnings = std::move(warnings);
  return model;
}

std::size_t assign_partition(const ClusterModel& model, const Eigen::VectorXd& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < model.clusters(); ++j) {
    const double dist = model.covariances[j].mahalanobis_squared(x - model.means[j]);
    if (dist < best_d) {
      best_d = dist;
      best = j;
    }
  }
  return best;
}

PointList thin_for_clustering(std::span<const Eigen::VectorXd> samples, std::size_t cap) {
  if (cap == 0) throw ContractError("thinning cap must be positive");
  if (samples.size() <= cap) return PointList(samples.begin(), samples.end());
  const std::size_t stride = (samples.size() + cap - 1) / cap;
  PointList out;
  out.reserve(samples.size() / stride + 1);
  for (std::size_t i = 0; i < samples.size(); i += stride) out.push_back(samples[i]);
  return out;
}

}  // namespace idemc
