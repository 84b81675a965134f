#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace idemc {

/// Violated precondition on an argument (length mismatch, bad parameter).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point was handed to an evaluator outside the declared box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The external evaluator process broke the line protocol.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, std::string offending_line)
      : std::runtime_error(what), line_(std::move(offending_line)) {}
  const std::string& offending_line() const noexcept { return line_; }

 private:
  std::string line_;
};

/// Rejection sampling ran out of attempts.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double volume_upper_bound)
      : std::runtime_error(what), bound_(volume_upper_bound) {}
  double volume_upper_bound() const noexcept { return bound_; }

 private:
  double bound_;
};

/// The ladder hit its rung cap before reaching the target cutoff.
class EmptyRegionError : public std::runtime_error {
 public:
  EmptyRegionError(const std::string& what, std::vector<double> trajectory)
      : std::runtime_error(what), trajectory_(std::move(trajectory)) {}
  const std::vector<double>& rung_trajectory() const noexcept {
    return trajectory_;
  }

 private:
  std::vector<double> trajectory_;
};

/// A chromosome left its level's subspace. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Configuration text could not be turned into a RunConfig.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string key, std::size_t line)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

}  // namespace idemc
