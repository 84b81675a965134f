#pragma once

#include <cstdio>
#include <mutex>
#include <string>
#include <sys/types.h>

#include "idemc/membership.hpp"

namespace idemc {

/// Implausibility served by a child process over its standard streams.
///
/// Protocol (one line each, space separated, newline terminated):
///   child  -> "IDEMC 1 <d> <m>"          handshake, once at start-up
///   parent -> "<x1> ... <xd>"            request
///   child  -> "<I1> ... <Im>"            response
/// Exactly one request is in flight at a time; concurrent callers are
/// serialized. Any malformed, short or non-finite response, or the child
/// exiting, raises TransportError carrying the offending line.
class ExternalEvaluator final : public ImplausibilityFunction {
 public:
  /// Launches `command` through /bin/sh and completes the handshake.
  /// `dimension`/`waves` of zero accept whatever the child announces.
  explicit ExternalEvaluator(std::string command, std::size_t dimension = 0,
                             std::size_t waves = 0);
  ~ExternalEvaluator() override;

  ExternalEvaluator(const ExternalEvaluator&) = delete;
  ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

  std::size_t dimension() const override { return dimension_; }
  std::size_t waves() const override { return waves_; }
  void evaluate(const Eigen::VectorXd& x, std::span<double> out) const override;
  std::string name() const override { return "external:" + command_; }

 private:
  std::string read_line() const;
  void shutdown() noexcept;

  std::string command_;
  std::size_t dimension_ = 0;
  std::size_t waves_ = 0;
  pid_t child_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
  mutable std::mutex mutex_;
  mutable bool broken_ = false;
};

/// Parses one response line into exactly `expected` finite reals.
/// Throws TransportError otherwise.
std::vector<double> parse_response_line(const std::string& line, std::size_t expected);

}  // namespace idemc
