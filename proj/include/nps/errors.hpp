#pragma once

#include <stdexcept>
#include <string>

namespace nps {

enum class ErrorKind {
  InvalidArgument,
  NonConvergence,
  LinearSolveFailure,
  MaxPrincipleViolation,
  NonpositiveConcentration,
  RetryWithSmallerDt,
  FormatError,
  IoError,
  ConfigError,
  InsufficientWindow,
  IdenticalStates,
  RankDeficient,
  GummelDivergence,
  NewtonStall,
  Mismatch,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-readable failure category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nps
