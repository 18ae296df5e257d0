#pragma once

#include <stdexcept>
#include <string>

namespace abe {

/// Failure classes map one-to-one onto the CLI exit codes.
enum class FailureClass : int {
  config = 2,
  resolution = 3,
  solver = 4,
  invariant = 5,
};

class Error : public std::runtime_error {
 public:
  Error(FailureClass kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  FailureClass kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  FailureClass kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(FailureClass::config, what) {}
};

class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& what) : Error(FailureClass::resolution, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(FailureClass::solver, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(FailureClass::invariant, what) {}
};

}  // namespace abe
