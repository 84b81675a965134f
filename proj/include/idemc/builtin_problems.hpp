#pragma once

#include <array>
#include <cmath>
#include <string>

#include "idemc/covariance.hpp"
#include "idemc/membership.hpp"

namespace idemc {

/// sqrt((x-m)ᵀ V⁻¹ (x-m)) for a fixed centre and covariance.
class QuadraticForm {
 public:
  QuadraticForm(Eigen::VectorXd center, Eigen::MatrixXd covariance);
  double operator()(const Eigen::VectorXd& x) const {
    return std::sqrt(factor_.mahalanobis_squared(x - center_));
  }
  const Eigen::VectorXd& center() const { return center_; }
  const CovarianceFactor& factor() const { return factor_; }

 private:
  Eigen::VectorXd center_;
  CovarianceFactor factor_;
};

/// min(A1, A2) over [-3,7]^2 with the two ellipses of the 2D example.
/// With `split_waves` the two forms are reported as separate waves instead.
class TwinQuadratic2d final : public ImplausibilityFunction {
 public:
  explicit TwinQuadratic2d(bool split_waves = false);
  std::size_t dimension() const override { return 2; }
  std::size_t waves() const override { return split_waves_ ? 2 : 1; }
  void evaluate(const Eigen::VectorXd& x, std::span<double> out) const override;
  std::string name() const override {
    return split_waves_ ? "two_wave_2d" : "twin_quadratic_2d";
  }
  const QuadraticForm& form(std::size_t i) const { return forms_.at(i); }
  static Box box() { return Box::cube(2, -3.0, 7.0); }

 private:
  std::array<QuadraticForm, 2> forms_;
  bool split_waves_;
};

/// Four-mode ring over [-20,40]^3:
/// I = (sqrt(uᵀσ⁻¹u) + x3²/0.04²) / 10 with u_k = (x_k - 2)² - 3.
class Ring3d final : public ImplausibilityFunction {
 public:
  Ring3d();
  std::size_t dimension() const override { return 3; }
  std::size_t waves() const override { return 1; }
  void evaluate(const Eigen::VectorXd& x, std::span<double> out) const override;
  std::string name() const override { return "ring_3d"; }
  static Box box() { return Box::cube(3, -20.0, 40.0); }

 private:
  CovarianceFactor sigma_;
};

/// Two thin correlated ellipsoids in [-3,7]^10; I = min_i A_i with
/// σ_i[j,k] = γ² sqrt(v_ij v_ik) C_jk and C_jk = 0.85 + 0.15·[j=k].
class TwinEllipsoid10d final : public ImplausibilityFunction {
 public:
  static constexpr double kDefaultGamma = 0.5838968;

  explicit TwinEllipsoid10d(double gamma = kDefaultGamma);
  std::size_t dimension() const override { return 10; }
  std::size_t waves() const override { return 1; }
  void evaluate(const Eigen::VectorXd& x, std::span<double> out) const override;
  std::string name() const override { return "twin_ellipsoid_10d"; }
  double gamma() const { return gamma_; }
  const QuadraticForm& form(std::size_t i) const { return forms_.at(i); }
  static Box box() { return Box::cube(10, -3.0, 7.0); }

 private:
  double gamma_;
  std::array<QuadraticForm, 2> forms_;
};

/// I(x) = x on [0,1]; a one-dimensional toy with analytically known levels.
class Ramp1d final : public ImplausibilityFunction {
 public:
  std::size_t dimension() const override { return 1; }
  std::size_t waves() const override { return 1; }
  void evaluate(const Eigen::VectorXd& x, std::span<double> out) const override {
    out[0] = x(0);
  }
  std::string name() const override { return "ramp_1d"; }
  static Box box() { return Box::cube(1, 0.0, 1.0); }
};

struct BuiltinOptions {
  double gamma = TwinEllipsoid10d::kDefaultGamma;
  /// Empty means the problem's default cutoffs.
  std::vector<double> cutoffs;
};

/// Names: twin_quadratic_2d, two_wave_2d, ring_3d, twin_ellipsoid_10d, ramp_1d.
Membership make_builtin(const std::string& name, const BuiltinOptions& options = {});
std::vector<std::string> builtin_names();

}  // namespace idemc
