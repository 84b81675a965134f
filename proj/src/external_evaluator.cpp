#include "idemc/external_evaluator.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstring>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "idemc/errors.hpp"

namespace idemc {

namespace {

std::vector<std::string> split_whitespace(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  return tokens;
}

bool parse_real(const std::string& token, double& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<double> parse_response_line(const std::string& line, std::size_t expected) {
  const auto tokens = split_whitespace(line);
  if (tokens.size() != expected) {
    std::ostringstream msg;
    msg << "external evaluator returned " << tokens.size() << " values, expected "
        << expected;
    throw TransportError(msg.str(), line);
  }
  std::vector<double> values(expected);
  for (std::size_t k = 0; k < expected; ++k) {
    if (!parse_real(tokens[k], values[k])) {
      throw TransportError("external evaluator returned a non-numeric value", line);
    }
    if (!std::isfinite(values[k])) {
      throw TransportError("external evaluator returned a non-finite value", line);
    }
  }
  return values;
}

ExternalEvaluator::ExternalEvaluator(std::string command, std::size_t dimension,
                                     std::size_t waves)
    : command_(std::move(command)) {
  int request_pipe[2];
  int response_pipe[2];
  if (pipe(request_pipe) != 0) throw TransportError("pipe() failed", "");
  if (pipe(response_pipe) != 0) {
    close(request_pipe[0]);
    close(request_pipe[1]);
    throw TransportError("pipe() failed", "");
  }
  child_ = fork();
  if (child_ < 0) {
    for (int fd : {request_pipe[0], request_pipe[1], response_pipe[0], response_pipe[1]}) {
      close(fd);
    }
    throw TransportError("fork() failed", "");
  }
  if (child_ == 0) {
    dup2(request_pipe[0], STDIN_FILENO);
    dup2(response_pipe[1], STDOUT_FILENO);
    close(request_pipe[0]);
    close(request_pipe[1]);
    close(response_pipe[0]);
    close(response_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(request_pipe[0]);
  close(response_pipe[1]);
  to_child_ = fdopen(request_pipe[1], "w");
  from_child_ = fdopen(response_pipe[0], "r");
  if (!to_child_ || !from_child_) {
    shutdown();
    throw TransportError("fdopen() failed", "");
  }
  // A dead child must surface as a TransportError, not SIGPIPE.
  std::signal(SIGPIPE, SIG_IGN);

  std::string handshake;
  try {
    handshake = read_line();
  } catch (...) {
    shutdown();
    throw;
  }
  const auto tokens = split_whitespace(handshake);
  std::size_t announced_d = 0;
  std::size_t announced_m = 0;
  bool ok = tokens.size() == 4 && tokens[0] == "IDEMC" && tokens[1] == "1";
  if (ok) {
    try {
      announced_d = std::stoul(tokens[2]);
      announced_m = std::stoul(tokens[3]);
    } catch (...) {
      ok = false;
    }
  }
  if (!ok || announced_d == 0 || announced_m == 0) {
    shutdown();
    throw TransportError("bad external evaluator handshake", handshake);
  }
  if ((dimension != 0 && dimension != announced_d) || (waves != 0 && waves != announced_m)) {
    shutdown();
    throw TransportError("external evaluator announced a different dimension or wave count",
                         handshake);
  }
  dimension_ = announced_d;
  waves_ = announced_m;
}

ExternalEvaluator::~ExternalEvaluator() { shutdown(); }

void ExternalEvaluator::shutdown() noexcept {
  if (to_child_) {
    std::fclose(to_child_);
    to_child_ = nullptr;
  }
  if (from_child_) {
    std::fclose(from_child_);
    from_child_ = nullptr;
  }
  if (child_ > 0) {
    int status = 0;
    // Closing stdin asks the child to exit; give it a moment, then insist.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(child_, &status, WNOHANG) == child_) {
        child_ = -1;
        return;
      }
      usleep(2000);
    }
    kill(child_, SIGKILL);
    waitpid(child_, &status, 0);
    child_ = -1;
  }
}

std::string ExternalEvaluator::read_line() const {
  std::string line;
  for (;;) {
    const int c = std::fgetc(from_child_);
    if (c == EOF) {
      broken_ = true;
      throw TransportError("external evaluator closed its output (process exited?)", line);
    }
    if (c == '\n') break;
    line.push_back(static_cast<char>(c));
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void ExternalEvaluator::evaluate(const Eigen::VectorXd& x, std::span<double> out) const {
  std::lock_guard lock(mutex_);
  if (broken_) throw TransportError("external evaluator is no longer usable", "");
  if (static_cast<std::size_t>(x.size()) != dimension_ || out.size() != waves_) {
    throw ContractError("external evaluator request has the wrong shape");
  }
  std::ostringstream request;
  request.precision(17);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (k) request << ' ';
    request << x(k);
  }
  request << '\n';
  const std::string text = request.str();
  if (std::fwrite(text.data(), 1, text.size(), to_child_) != text.size() ||
      std::fflush(to_child_) != 0) {
    broken_ = true;
    throw TransportError("could not write to external evaluator", text);
  }
  const std::string line = read_line();
  std::vector<double> values;
  try {
    values = parse_response_line(line, waves_);
  } catch (...) {
    broken_ = true;
    throw;
  }
  std::copy(values.begin(), values.end(), out.begin());
}

}  // namespace idemc
