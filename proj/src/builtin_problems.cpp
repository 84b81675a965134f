#include "idemc/builtin_problems.hpp"

#include <cmath>

#include "idemc/errors.hpp"

namespace idemc {

namespace {

Eigen::MatrixXd matrix2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

Eigen::VectorXd vector_of(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

QuadraticForm ellipsoid_10d(const Eigen::VectorXd& center, const Eigen::VectorXd& v,
                            double gamma) {
  Eigen::MatrixXd sigma(10, 10);
  for (Eigen::Index j = 0; j < 10; ++j) {
    for (Eigen::Index k = 0; k < 10; ++k) {
      const double c = 0.85 + (j == k ? 0.15 : 0.0);
      sigma(j, k) = gamma * gamma * std::sqrt(v(j)) * std::sqrt(v(k)) * c;
    }
  }
  return QuadraticForm(center, sigma);
}

}  // namespace

QuadraticForm::QuadraticForm(Eigen::VectorXd center, Eigen::MatrixXd covariance)
    : center_(std::move(center)), factor_(std::move(covariance)) {}

TwinQuadratic2d::TwinQuadratic2d(bool split_waves)
    : forms_{QuadraticForm(vector_of({1.6, 1.7}), matrix2(0.4, 0.0, 0.0, 0.008)),
             QuadraticForm(vector_of({1.0, 3.0}), matrix2(0.08, 0.186, 0.186, 0.48))},
      split_waves_(split_waves) {}

void TwinQuadratic2d::evaluate(const Eigen::VectorXd& x, std::span<double> out) const {
  const double a1 = forms_[0](x);
  const double a2 = forms_[1](x);
  if (split_waves_) {
    out[0] = a1;
    out[1] = a2;
  } else {
    out[0] = std::min(a1, a2);
  }
}

Ring3d::Ring3d() : sigma_(matrix2(1.0, -0.97, -0.97, 1.0) / 4096.0) {}

void Ring3d::evaluate(const Eigen::VectorXd& x, std::span<double> out) const {
  Eigen::VectorXd u(2);
  u << (x(0) - 2.0) * (x(0) - 2.0) - 3.0, (x(1) - 2.0) * (x(1) - 2.0) - 3.0;
  const double x3 = x(2);
  out[0] = 0.1 * (std::sqrt(sigma_.mahalanobis_squared(u)) + x3 * x3 / (0.04 * 0.04));
}

TwinEllipsoid10d::TwinEllipsoid10d(double gamma)
    : gamma_(gamma),
      forms_{ellipsoid_10d(vector_of({1, 1, 1, 1, 1, 1, 1, 1, 1, 1}),
                           vector_of({0.1, 0.0125, 0.025, 0.04, 0.01, 0.1, 0.0125,
                                      0.025, 0.04, 0.01}),
                           gamma),
             ellipsoid_10d(vector_of({4, 3, 3, 4, 3, 4, 4, 4, 2, 2}),
                           vector_of({0.025, 0.1, 0.01, 0.01, 0.05, 0.025, 0.1, 0.01,
                                      0.01, 0.05}),
                           gamma)} {
  if (!(gamma > 0.0)) throw ContractError("gamma must be positive");
}

void TwinEllipsoid10d::evaluate(const Eigen::VectorXd& x, std::span<double> out) const {
  out[0] = std::min(forms_[0](x), forms_[1](x));
}

std::vector<std::string> builtin_names() {
  return {"twin_quadratic_2d", "two_wave_2d", "ring_3d", "twin_ellipsoid_10d", "ramp_1d"};
}

Membership make_builtin(const std::string& name, const BuiltinOptions& options) {
  auto cutoffs_or = [&](std::vector<double> fallback) {
    return options.cutoffs.empty() ? fallback : options.cutoffs;
  };
  if (name == "twin_quadratic_2d") {
    return Membership(std::make_shared<TwinQuadratic2d>(false), TwinQuadratic2d::box(),
                      cutoffs_or({3.0}));
  }
  if (name == "two_wave_2d") {
    return Membership(std::make_shared<TwinQuadratic2d>(true), TwinQuadratic2d::box(),
                      cutoffs_or({3.0, 3.0}));
  }
  if (name == "ring_3d") {
    return Membership(std::make_shared<Ring3d>(), Ring3d::box(), cutoffs_or({3.0}));
  }
  if (name == "twin_ellipsoid_10d") {
    return Membership(std::make_shared<TwinEllipsoid10d>(options.gamma),
                      TwinEllipsoid10d::box(), cutoffs_or({3.0}));
  }
  if (name == "ramp_1d") {
    return Membership(std::make_shared<Ramp1d>(), Ramp1d::box(), cutoffs_or({0.25}));
  }
  throw ContractError("unknown built-in problem '" + name + "'");
}

}  // namespace idemc
