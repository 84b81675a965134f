#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "idemc/membership.hpp"

namespace idemc {

/// Outcome of a statistical check. pass iff statistic < threshold.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
};

struct RejectionResult {
  SampleSet samples;
  std::uint64_t attempts = 0;
  /// Accepted fraction; an unbiased estimate of the target's relative volume.
  double acceptance() const {
    return attempts ? static_cast<double>(samples.size()) / static_cast<double>(attempts) : 0.0;
  }
};

/// n i.i.d. uniform points in the target region by plain rejection from the
/// box. Throws InfeasibleError once `max_attempts` draws have been spent.
RejectionResult rejection_sample(const Membership& membership, std::size_t n, Rng& rng,
                                 std::uint64_t max_attempts = 100'000'000);

/// Volume of {x : (x-c)ᵀ V⁻¹ (x-c) <= r²}.
double ellipsoid_volume(const Eigen::MatrixXd& covariance, double radius);

/// n uniform points in {x : (x-c)ᵀ V⁻¹ (x-c) <= r²}: a uniform draw in the
/// unit ball mapped through the Cholesky factor. Values hold sqrt of the form.
SampleSet ellipsoid_direct_sample(const Eigen::VectorXd& center, const Eigen::MatrixXd& covariance,
                                  double radius, std::size_t n, Rng& rng);

struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd covariance;
};

/// n uniform points in the union of the ellipsoids (each of radius `radius`)
/// intersected with the box. Values hold the minimum over ellipsoids of
/// sqrt of the form.
SampleSet union_ellipsoid_sample(std::span<const Ellipsoid> ellipsoids, double radius,
                                 const Box& box, std::size_t n, Rng& rng);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic critical value
/// c(α)·sqrt((n_a+n_b)/(n_a·n_b)). Effective sizes, when nonzero, replace
/// the raw sizes in the critical value.
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha,
                         double effective_a = 0.0, double effective_b = 0.0);

/// One-sample Kolmogorov-Smirnov test against U[lo, hi].
TestReport ks_uniform(std::span<const double> values, double lo, double hi, double alpha);

/// Pearson chi-square test of uniformity on [lo, hi] with equal-width bins.
TestReport chi_square_uniformity(std::span<const double> values, double lo, double hi,
                                 std::size_t bins, double alpha);

/// sqrt(-ln(α/2)/2)
double ks_coefficient(double alpha);

}  // namespace idemc

namespace idemc {

/// The ellipsoids whose union is the target of a built-in ellipsoid problem
/// (twin_quadratic_2d, twin_ellipsoid_10d); the radius is the target cutoff.
/// Throws ContractError for any other problem.
std::vector<Ellipsoid> target_ellipsoids(const Membership& membership);

}  // namespace idemc
