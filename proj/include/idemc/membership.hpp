#pragma once

#include <Eigen/Core>
#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "idemc/random.hpp"

namespace idemc {

/// One implausibility value per wave.
using ImplausibilityVector = std::vector<double>;

/// Cutoff sentinel meaning "this wave is not constrained at this level".
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Axis-aligned input box.
class Box {
 public:
  Box(std::vector<double> lower, std::vector<double> upper);
  /// [lo, hi]^d
  static Box cube(std::size_t dimension, double lo, double hi);

  std::size_t dimension() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double width(std::size_t k) const { return upper_[k] - lower_[k]; }
  double volume() const;

  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd uniform(Rng& rng) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Maps an in-box point to its m implausibility values. Implementations must
/// be safe to call concurrently.
class ImplausibilityFunction {
 public:
  virtual ~ImplausibilityFunction() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::size_t waves() const = 0;
  virtual void evaluate(const Eigen::VectorXd& x, std::span<double> out) const = 0;
  virtual std::string name() const = 0;
};

/// True iff values[k] <= cutoffs[k] for every k. Unbounded cutoffs always pass.
bool is_member(std::span<const double> values, std::span<const double> cutoffs);

/// The membership rule: an implausibility function, its box, and the target
/// cutoffs. Counts every evaluation.
class Membership {
 public:
  Membership(std::shared_ptr<const ImplausibilityFunction> function, Box box,
             std::vector<double> cutoffs);

  std::size_t dimension() const { return box_.dimension(); }
  std::size_t waves() const { return cutoffs_.size(); }
  const Box& box() const { return box_; }
  const std::vector<double>& cutoffs() const { return cutoffs_; }
  const ImplausibilityFunction& function() const { return *function_; }

  /// Counted evaluation. Throws DomainError for out-of-box points.
  ImplausibilityVector evaluate(const Eigen::VectorXd& x) const;
  /// Same values without touching the counter; for diagnostics only.
  ImplausibilityVector evaluate_uncounted(const Eigen::VectorXd& x) const;

  bool in_target(const ImplausibilityVector& values) const {
    return is_member(values, cutoffs_);
  }

  std::uint64_t evaluation_count() const { return count_->load(); }
  void reset_evaluation_count() const { count_->store(0); }

 private:
  std::shared_ptr<const ImplausibilityFunction> function_;
  Box box_;
  std::vector<double> cutoffs_;
  std::shared_ptr<std::atomic<std::uint64_t>> count_;
};

}  // namespace idemc

namespace idemc {

/// Points with their cached implausibility values, in retention order.
struct SampleSet {
  std::vector<Eigen::VectorXd> points;
  std::vector<ImplausibilityVector> values;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void push_back(Eigen::VectorXd x, ImplausibilityVector v) {
    points.push_back(std::move(x));
    values.push_back(std::move(v));
  }
  /// Column k of the points.
  std::vector<double> coordinate(std::size_t k) const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p(static_cast<Eigen::Index>(k)));
    return out;
  }
};

}  // namespace idemc
