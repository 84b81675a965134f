#include "idemc/proposals.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

#include "idemc/errors.hpp"

namespace idemc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

// P(lo <= Z <= hi) for Z ~ N(0,1), evaluated on the tail that keeps precision.
double standard_interval_mass(double lo, double hi) {
  if (lo > 0.0) {
    return boost::math::cdf(boost::math::complement(kStdNormal, lo)) -
           boost::math::cdf(boost::math::complement(kStdNormal, hi));
  }
  return boost::math::cdf(kStdNormal, hi) - boost::math::cdf(kStdNormal, lo);
}

double truncated_standard_draw(double lo, double hi, Rng& rng) {
  const double flo = boost::math::cdf(kStdNormal, lo);
  const double fhi = boost::math::cdf(kStdNormal, hi);
  if (fhi - flo > 1e-12) {
    double u = flo + rng.uniform() * (fhi - flo);
    u = std::clamp(u, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
    return std::clamp(boost::math::quantile(kStdNormal, u), lo, hi);
  }
  // Deep tail: the interval is tiny in probability, uniform on it is adequate.
  return rng.uniform(lo, hi);
}

}  // namespace

ProposalKernel::ProposalKernel(std::shared_ptr<const ClusterModel> model, KernelKind kind,
                               Box box, double scale)
    : model_(std::move(model)),
      kind_(kind),
      box_(std::move(box)),
      scale_(scale),
      cache_(std::make_shared<MassCache>()) {
  if (!model_ || model_->clusters() == 0) {
    throw ContractError("proposal kernel needs a fitted cluster model");
  }
  if (!(scale_ > 0.0)) throw ContractError("covariance scale must be positive");
  if (!(model_->omega > 0.0 && model_->omega <= 1.0)) {
    throw ContractError("mixture weight must lie in (0, 1]");
  }
  scaled_.reserve(model_->clusters() + 1);
  for (const auto& cov : model_->covariances) {
    scaled_.push_back(scale_ == 1.0 ? cov : cov.scaled(scale_));
  }
  scaled_.push_back(scale_ == 1.0 ? model_->whole : model_->whole.scaled(scale_));
  cache_->standard_draws.resize(scaled_.size());
}

const CovarianceFactor& ProposalKernel::component(std::size_t index) const {
  return scaled_.at(index);
}

Eigen::VectorXd ProposalKernel::propose(const Eigen::VectorXd& x, Rng& rng) const {
  const std::size_t whole = model_->clusters();
  const std::size_t comp =
      rng.bernoulli(model_->omega) ? assign_partition(*model_, x) : whole;
  if (kind_ == KernelKind::Normal) return x + component(comp).draw(rng);
  return draw_truncated(comp, x, rng);
}

Eigen::VectorXd ProposalKernel::draw_truncated(std::size_t comp,
                                               const Eigen::VectorXd& center,
                                               Rng& rng) const {
  const auto& factor = component(comp);
  for (std::size_t attempt = 0; attempt < kTruncationRetries; ++attempt) {
    Eigen::VectorXd y = center + factor.draw(rng);
    if (box_.contains(y)) return y;
  }
  // Gibbs sweeps over the coordinate conditionals, each truncated to the box.
  const Eigen::MatrixXd precision =
      factor.covariance().llt().solve(Eigen::MatrixXd::Identity(center.size(), center.size()));
  Eigen::VectorXd y = center;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    y(k) = std::clamp(y(k), box_.lower()[static_cast<std::size_t>(k)],
                      box_.upper()[static_cast<std::size_t>(k)]);
  }
  constexpr int kSweeps = 20;
  for (int sweep = 0; sweep < kSweeps; ++sweep) {
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      const double qkk = precision(k, k);
      const Eigen::VectorXd delta = y - center;
      const double cross = precision.row(k).dot(delta) - qkk * delta(k);
      const double mean = center(k) - cross / qkk;
      const double sd = 1.0 / std::sqrt(qkk);
      const auto ku = static_cast<std::size_t>(k);
      const double z = truncated_standard_draw((box_.lower()[ku] - mean) / sd,
                                               (box_.upper()[ku] - mean) / sd, rng);
      y(k) = std::clamp(mean + sd * z, box_.lower()[ku], box_.upper()[ku]);
    }
  }
  return y;
}

double ProposalKernel::log_box_mass(std::size_t comp, const Eigen::VectorXd& center) const {
  const auto& factor = component(comp);
  const auto d = static_cast<std::size_t>(center.size());

  bool interior = true;
  for (std::size_t k = 0; k < d && interior; ++k) {
    const double sd = std::sqrt(factor.covariance()(static_cast<Eigen::Index>(k),
                                                    static_cast<Eigen::Index>(k)));
    const double c = center(static_cast<Eigen::Index>(k));
    interior = c - box_.lower()[k] > 9.0 * sd && box_.upper()[k] - c > 9.0 * sd;
  }
  if (interior) return 0.0;

  if (factor.is_diagonal()) {
    double log_mass = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      const double sd = std::sqrt(factor.covariance()(ki, ki));
      log_mass += std::log(standard_interval_mass((box_.lower()[k] - center(ki)) / sd,
                                                  (box_.upper()[k] - center(ki)) / sd));
    }
    return log_mass;
  }

  // Correlated: Monte Carlo with fixed standard draws at the centre of the
  // cell containing `center`, cached per (component, cell).
  std::vector<long long> cell(d);
  Eigen::VectorXd cell_center(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    const double h = box_.width(k) / kTruncationCellsPerEdge;
    cell[k] = static_cast<long long>(
        std::floor((center(static_cast<Eigen::Index>(k)) - box_.lower()[k]) / h));
    cell_center(static_cast<Eigen::Index>(k)) =
        box_.lower()[k] + (static_cast<double>(cell[k]) + 0.5) * h;
  }
  std::lock_guard lock(cache_->mutex);
  const auto key = std::make_pair(comp, cell);
  if (auto it = cache_->values.find(key); it != cache_->values.end()) return it->second;
  auto& draws = cache_->standard_draws[comp];
  if (draws.size() == 0) {
    Rng fixed(0x7275C47EULL + comp);
    draws.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(kTruncationDraws));
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      for (Eigen::Index k = 0; k < draws.rows(); ++k) draws(k, j) = fixed.normal();
    }
    draws = (factor.lower().triangularView<Eigen::Lower>() * draws).eval();
  }
  std::size_t inside = 0;
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    if (box_.contains(cell_center + draws.col(j))) ++inside;
  }
  const double mass = std::max<double>(static_cast<double>(inside), 0.5) /
                      static_cast<double>(kTruncationDraws);
  const double log_mass = std::log(mass);
  cache_->values.emplace(key, log_mass);
  return log_mass;
}

double ProposalKernel::component_log_density(std::size_t comp, const Eigen::VectorXd& from,
                                             const Eigen::VectorXd& to) const {
  double value = component(comp).log_density(to - from);
  if (kind_ == KernelKind::TruncatedNormal) {
    if (!box_.contains(to)) return kNegInf;
    value -= log_box_mass(comp, from);
  }
  return value;
}

double ProposalKernel::log_density(const Eigen::VectorXd& from,
                                   const Eigen::VectorXd& to) const {
  const double omega = model_->omega;
  const std::size_t cell = assign_partition(*model_, from);
  double value = std::log(omega) + component_log_density(cell, from, to);
  if (omega < 1.0) {
    value = log_sum_exp(value, std::log1p(-omega) +
                                   component_log_density(model_->clusters(), from, to));
  }
  return value;
}

double ProposalKernel::density(const Eigen::VectorXd& from, const Eigen::VectorXd& to) const {
  return std::exp(log_density(from, to));
}

double ProposalKernel::mutation_accept_prob(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& y,
                                            bool y_in_subspace) const {
  if (!y_in_subspace) return 0.0;
  const double forward = log_density(x, y);
  if (forward == kNegInf || std::isnan(forward)) {
    throw ContractError("proposal density q(y|x) vanished for an accepted-support move");
  }
  const double log_ratio = log_density(y, x) - forward;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

}  // namespace idemc
