#pragma once

#include <stdexcept>
#include <string>

namespace zrp {

enum class ErrorKind {
  usage,
  config,
  range,
  convergence,
  resource,
  precondition,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& w) : Error(ErrorKind::usage, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};

struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error(ErrorKind::range, w) {}
};

struct ResourceError : Error {
  explicit ResourceError(const std::string& w) : Error(ErrorKind::resource, w) {}
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& w)
      : Error(ErrorKind::precondition, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

// Iterative solve stopped at its cap; carries the last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& w, double residual, int iterations)
      : Error(ErrorKind::convergence, w),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace zrp
