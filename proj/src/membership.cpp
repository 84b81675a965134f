#include "idemc/membership.hpp"

#include <cmath>
#include <sstream>

#include "idemc/errors.hpp"

namespace idemc {

Box::Box(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty() || lower_.size() != upper_.size()) {
    throw ContractError("box bounds must be non-empty and of equal length");
  }
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    if (!(lower_[k] < upper_[k]) || !std::isfinite(lower_[k]) ||
        !std::isfinite(upper_[k])) {
      std::ostringstream msg;
      msg << "box bound " << k << " must satisfy min < max";
      throw ContractError(msg.str());
    }
  }
}

Box Box::cube(std::size_t dimension, double lo, double hi) {
  return Box(std::vector<double>(dimension, lo), std::vector<double>(dimension, hi));
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < dimension(); ++k) v *= width(k);
  return v;
}

bool Box::contains(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) return false;
  for (std::size_t k = 0; k < dimension(); ++k) {
    const double v = x(static_cast<Eigen::Index>(k));
    if (!(v >= lower_[k] && v <= upper_[k])) return false;
  }
  return true;
}

Eigen::VectorXd Box::uniform(Rng& rng) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dimension()));
  for (std::size_t k = 0; k < dimension(); ++k) {
    x(static_cast<Eigen::Index>(k)) = rng.uniform(lower_[k], upper_[k]);
  }
  return x;
}

bool is_member(std::span<const double> values, std::span<const double> cutoffs) {
  if (values.size() != cutoffs.size()) {
    throw ContractError("implausibility and cutoff lengths differ");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (cutoffs[k] == kUnbounded) continue;
    if (!(values[k] <= cutoffs[k])) return false;
  }
  return true;
}

Membership::Membership(std::shared_ptr<const ImplausibilityFunction> function, Box box,
                       std::vector<double> cutoffs)
    : function_(std::move(function)),
      box_(std::move(box)),
      cutoffs_(std::move(cutoffs)),
      count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (!function_) throw ContractError("membership needs an implausibility function");
  if (function_->dimension() != box_.dimension()) {
    throw ContractError("implausibility dimension does not match the box");
  }
  if (cutoffs_.size() != function_->waves() || cutoffs_.empty()) {
    throw ContractError("need exactly one cutoff per wave");
  }
  for (double a : cutoffs_) {
    if (!(a > 0.0)) throw ContractError("cutoffs must be positive");
  }
}

ImplausibilityVector Membership::evaluate(const Eigen::VectorXd& x) const {
  ImplausibilityVector out = evaluate_uncounted(x);
  count_->fetch_add(1, std::memory_order_relaxed);
  return out;
}

ImplausibilityVector Membership::evaluate_uncounted(const Eigen::VectorXd& x) const {
  if (!box_.contains(x)) throw DomainError("point lies outside the input box");
  ImplausibilityVector out(waves());
  function_->evaluate(x, out);
  return out;
}

}  // namespace idemc
