#include "idemc/oracle.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "idemc/covariance.hpp"
#include "idemc/errors.hpp"

namespace idemc {

RejectionResult rejection_sample(const Membership& membership, std::size_t n, Rng& rng,
                                 std::uint64_t max_attempts) {
  RejectionResult out;
  out.samples.points.reserve(n);
  out.samples.values.reserve(n);
  while (out.samples.size() < n) {
    if (out.attempts >= max_attempts) {
      // Rule of three: with k hits in A draws, (k+3)/A bounds the volume at ~95%.
      const double bound = (static_cast<double>(out.samples.size()) + 3.0) /
                           static_cast<double>(out.attempts);
      std::ostringstream msg;
      msg << "rejection sampling found " << out.samples.size() << " of " << n << " points in "
          << out.attempts << " draws; target volume is below about " << bound;
      throw InfeasibleError(msg.str(), bound);
    }
    Eigen::VectorXd x = membership.box().uniform(rng);
    ++out.attempts;
    ImplausibilityVector v = membership.evaluate(x);
    if (membership.in_target(v)) out.samples.push_back(std::move(x), std::move(v));
  }
  return out;
}

double ellipsoid_volume(const Eigen::MatrixXd& covariance, double radius) {
  const CovarianceFactor factor(covariance);
  const double d = static_cast<double>(factor.dimension());
  const double log_ball = 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0);
  return std::exp(log_ball + d * std::log(radius) + 0.5 * factor.log_determinant());
}

SampleSet ellipsoid_direct_sample(const Eigen::VectorXd& center, const Eigen::MatrixXd& covariance,
                                  double radius, std::size_t n, Rng& rng) {
  const CovarianceFactor factor(covariance);
  const auto d = static_cast<Eigen::Index>(factor.dimension());
  if (center.size() != d) throw ContractError("centre and covariance dimensions differ");
  if (!(radius > 0.0)) throw ContractError("radius must be positive");
  SampleSet out;
  out.points.reserve(n);
  out.values.reserve(n);
  Eigen::VectorXd z(d);
  for (std::size_t k = 0; k < n; ++k) {
    for (Eigen::Index c = 0; c < d; ++c) z(c) = rng.normal();
    const double u = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    z *= radius * u / z.norm();
    Eigen::VectorXd x = center + factor.lower() * z;
    out.push_back(std::move(x), {radius * u});
  }
  return out;
}

SampleSet union_ellipsoid_sample(std::span<const Ellipsoid> ellipsoids, double radius,
                                 const Box& box, std::size_t n, Rng& rng) {
  if (ellipsoids.empty()) throw ContractError("need at least one ellipsoid");
  std::vector<CovarianceFactor> factors;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& e : ellipsoids) {
    factors.emplace_back(e.covariance);
    total += ellipsoid_volume(e.covariance, radius);
    cumulative.push_back(total);
  }
  const double r2 = radius * radius;
  SampleSet out;
  out.points.reserve(n);
  out.values.reserve(n);
  while (out.size() < n) {
    const double u = rng.uniform() * total;
    const auto pick = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const std::size_t chosen = std::min(pick, ellipsoids.size() - 1);
    Eigen::VectorXd x = ellipsoid_direct_sample(ellipsoids[chosen].center,
                                                ellipsoids[chosen].covariance, radius, 1, rng)
                            .points.front();
    if (!box.contains(x)) continue;
    std::size_t containing = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const double q = factors[k].mahalanobis_squared(x - ellipsoids[k].center);
      best = std::min(best, q);
      if (q <= r2) ++containing;
    }
    // Points in an overlap are proposed once per covering ellipsoid.
    if (containing > 1 && rng.uniform() * static_cast<double>(containing) >= 1.0) continue;
    out.push_back(std::move(x), {std::sqrt(best)});
  }
  return out;
}

double ks_coefficient(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha,
                         double effective_a, double effective_b) {
  if (a.empty() || b.empty()) throw ContractError("KS test needs non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ea = effective_a > 0.0 ? effective_a : na;
  const double eb = effective_b > 0.0 ? effective_b : nb;
  TestReport r;
  r.name = "ks_two_sample";
  r.statistic = d;
  r.threshold = ks_coefficient(alpha) * std::sqrt((ea + eb) / (ea * eb));
  r.pass = r.statistic < r.threshold;
  r.size_a = x.size();
  r.size_b = y.size();
  return r;
}

TestReport ks_uniform(std::span<const double> values, double lo, double hi, double alpha) {
  if (values.empty()) throw ContractError("KS test needs a non-empty sample");
  if (!(hi > lo)) throw ContractError("empty interval");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double f = std::clamp((x[k] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  TestReport r;
  r.name = "ks_uniform";
  r.statistic = d;
  r.threshold = ks_coefficient(alpha) / std::sqrt(n);
  r.pass = r.statistic < r.threshold;
  r.size_a = x.size();
  return r;
}

TestReport chi_square_uniformity(std::span<const double> values, double lo, double hi,
                                 std::size_t bins, double alpha) {
  if (bins < 2) throw ContractError("need at least two bins");
  if (values.empty()) throw ContractError("chi-square test needs a non-empty sample");
  if (!(hi > lo)) throw ContractError("empty interval");
  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    if (v < lo || v > hi) throw ContractError("value outside the tested interval");
    auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    counts[std::min(k, bins - 1)] += 1.0;
  }
  const double expected = static_cast<double>(values.size()) / static_cast<double>(bins);
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(static_cast<double>(bins - 1));
  TestReport r;
  r.name = "chi_square_uniformity";
  r.statistic = stat;
  r.threshold = boost::math::quantile(dist, 1.0 - alpha);
  r.pass = r.statistic < r.threshold;
  r.size_a = values.size();
  return r;
}

}  // namespace idemc

#include "idemc/builtin_problems.hpp"

namespace idemc {

std::vector<Ellipsoid> target_ellipsoids(const Membership& membership) {
  auto from = [](const auto& problem) {
    std::vector<Ellipsoid> out;
    for (std::size_t i = 0; i < 2; ++i) {
      out.push_back({problem.form(i).center(), problem.form(i).factor().covariance()});
    }
    return out;
  };
  const ImplausibilityFunction& f = membership.function();
  if (const auto* twin = dynamic_cast<const TwinQuadratic2d*>(&f); twin && f.waves() == 1) {
    return from(*twin);
  }
  if (const auto* twin = dynamic_cast<const TwinEllipsoid10d*>(&f)) return from(*twin);
  throw ContractError("problem '" + f.name() + "' has no direct ellipsoid sampler");
}

}  // namespace idemc
