#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "idemc/covariance.hpp"

namespace idemc {

using PointList = std::vector<Eigen::VectorXd>;

/// Partition of one ladder level used by its mutation proposal: cluster
/// centres and covariances, the whole-level covariance, and the weight ω of
/// the local component.
struct ClusterModel {
  std::size_t level = 0;
  std::vector<Eigen::VectorXd> means;
  std::vector<CovarianceFactor> covariances;
  CovarianceFactor whole;
  double omega = 0.9;
  std::vector<std::string> warnings;

  std::size_t clusters() const { return means.size(); }
};

struct ClusterFitOptions {
  std::size_t max_k = 10;
  /// Relative ridge: ridge · trace(V)/d is added to every covariance.
  double ridge = 1e-8;
  std::size_t restarts = 5;
  std::size_t max_iterations = 100;
  double omega = 0.9;
  std::uint64_t seed = 1;
};

struct KMeansResult {
  std::vector<Eigen::VectorXd> centers;
  std::vector<std::size_t> labels;
  double inertia = 0.0;
};

/// Lloyd's k-means, k-means++ seeding, best of `restarts` by inertia.
KMeansResult kmeans(std::span<const Eigen::VectorXd> points, std::size_t k,
                    std::size_t restarts, std::size_t max_iterations, Rng& rng);

/// Spherical-Gaussian BIC of a hard partition with k·(d+1) parameters.
/// Lower is better.
double spherical_bic(std::span<const Eigen::VectorXd> points, const KMeansResult& fit);

/// k-means for k = 1..max_k, keeps the minimum-BIC k, then fits per-cluster
/// and whole-sample covariances. Needs at least two samples.
ClusterModel fit_cluster_model(std::span<const Eigen::VectorXd> samples,
                               const ClusterFitOptions& options);

/// argmin_j (x-μ_j)ᵀ V_j⁻¹ (x-μ_j), lowest index on ties. Zero-based.
std::size_t assign_partition(const ClusterModel& model, const Eigen::VectorXd& x);

/// Identity when under the cap, otherwise every ⌈n/cap⌉-th sample.
PointList thin_for_clustering(std::span<const Eigen::VectorXd> samples, std::size_t cap);

}  // namespace idemc
