#include "idemc/covariance.hpp"

#include <cmath>
#include <numbers>

#include "idemc/errors.hpp"

namespace idemc {

std::uint64_t mix_seed(std::uint64_t value) {
  value += 0x9E3779B97F4A7C15ULL;
  value = (value ^ (value >> 30)) * 0xBF58476D1CE4E5B9ULL;
  value = (value ^ (value >> 27)) * 0x94D049BB133111EBULL;
  return value ^ (value >> 31);
}

CovarianceFactor::CovarianceFactor(Eigen::MatrixXd covariance)
    : covariance_(std::move(covariance)) {
  if (covariance_.rows() == 0 || covariance_.rows() != covariance_.cols()) {
    throw ContractError("covariance must be a non-empty square matrix");
  }
  const double scale = covariance_.cwiseAbs().maxCoeff();
  if (!std::isfinite(scale) ||
      (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ContractError("covariance is not symmetric");
  }
  // Exact symmetry keeps densities q(x|y) and q(y|x) bitwise comparable.
  covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    throw ContractError("covariance is not positive definite");
  }
  lower_ = llt.matrixL();
  log_det_ = 0.0;
  for (Eigen::Index i = 0; i < lower_.rows(); ++i) {
    const double pivot = lower_(i, i);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw ContractError("covariance is not positive definite");
    }
    log_det_ += 2.0 * std::log(pivot);
  }
  diagonal_ = true;
  for (Eigen::Index r = 0; r < covariance_.rows() && diagonal_; ++r) {
    for (Eigen::Index c = 0; c < covariance_.cols(); ++c) {
      if (r != c && covariance_(r, c) != 0.0) {
        diagonal_ = false;
        break;
      }
    }
  }
}

double CovarianceFactor::mahalanobis_squared(const Eigen::VectorXd& delta) const {
  if (diagonal_) {
    return (delta.array().square() / covariance_.diagonal().array()).sum();
  }
  return lower_.triangularView<Eigen::Lower>().solve(delta).squaredNorm();
}

double CovarianceFactor::log_density(const Eigen::VectorXd& delta) const {
  const double d = static_cast<double>(dimension());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det_ +
                 mahalanobis_squared(delta));
}

Eigen::VectorXd CovarianceFactor::draw(Rng& rng) const {
  Eigen::VectorXd z(lower_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return lower_.triangularView<Eigen::Lower>() * z;
}

CovarianceFactor CovarianceFactor::scaled(double factor) const {
  if (!(factor > 0.0)) throw ContractError("covariance scale must be positive");
  return CovarianceFactor(covariance_ * factor);
}

Eigen::VectorXd sample_mean(const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) throw ContractError("mean of an empty sample");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(points.front().size());
  for (const auto& p : points) mean += p;
  return mean / static_cast<double>(points.size());
}

Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& points,
                                  const Eigen::VectorXd& mean) {
  const auto d = mean.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  if (points.size() < 2) return cov;
  for (const auto& p : points) {
    const Eigen::VectorXd delta = p - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(delta);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  return cov / static_cast<double>(points.size() - 1);
}

}  // namespace idemc
