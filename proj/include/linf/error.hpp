#pragma once

#include <stdexcept>
#include <string>

namespace linf {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue vector left the cone an operator is defined on.
class ConeError : public Error {
 public:
  using Error::Error;
};

/// A caller-side precondition that the operation verifies explicitly
/// (as opposed to silently returning a negative answer).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A ray already sits beyond the requested level set where it enters the cone.
class LevelPassedError : public Error {
 public:
  using Error::Error;
};

/// A scenario file is malformed, has unknown keys or out-of-range values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class SolveFailure {
  NonConvergence,
  PositivityLoss,
  IncompatibleData,
  NoAdmissibleStart,
  ConeExit,
  LinearSolve,
  EmptySublevel,
};

const char* to_string(SolveFailure f);

class SolveError : public Error {
 public:
  SolveError(SolveFailure reason, const std::string& what)
      : Error(std::string(to_string(reason)) + ": " + what), reason_(reason) {}
  SolveFailure reason() const noexcept { return reason_; }

 private:
  SolveFailure reason_;
};

}  // namespace linf
