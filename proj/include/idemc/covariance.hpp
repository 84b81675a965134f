#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <vector>

#include "idemc/random.hpp"

namespace idemc {

/// A symmetric positive-definite covariance held through its Cholesky factor.
/// Quadratic forms and densities go through the factor; the inverse is never
/// formed explicitly.
class CovarianceFactor {
 public:
  /// Throws ContractError if `covariance` is not symmetric positive definite.
  explicit CovarianceFactor(Eigen::MatrixXd covariance);

  std::size_t dimension() const { return static_cast<std::size_t>(covariance_.rows()); }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& lower() const { return lower_; }
  double log_determinant() const { return log_det_; }
  bool is_diagonal() const { return diagonal_; }

  /// deltaᵀ V⁻¹ delta
  double mahalanobis_squared(const Eigen::VectorXd& delta) const;
  /// log N(delta; 0, V)
  double log_density(const Eigen::VectorXd& delta) const;
  /// A draw from N(0, V).
  Eigen::VectorXd draw(Rng& rng) const;
  /// The same factor with V replaced by factor·V.
  CovarianceFactor scaled(double factor) const;

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd lower_;
  double log_det_ = 0.0;
  bool diagonal_ = false;
};

/// Sample covariance (divisor n-1) of the columns of a point list.
Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& points,
                                  const Eigen::VectorXd& mean);

Eigen::VectorXd sample_mean(const std::vector<Eigen::VectorXd>& points);

}  // namespace idemc
