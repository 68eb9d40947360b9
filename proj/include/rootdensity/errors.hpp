#pragma once

#include <stdexcept>
#include <string>

namespace rootdensity {

// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  kOk = 0,
  kFormat = 2,
  kDegeneracy = 3,
  kConfig = 4,
  kIo = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ExitCode::kFormat, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::kIo, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

/// Leading coefficient too small to normalize; the caller must reduce the
/// degree before retrying.
class DegenerateLeadingCoefficient : public Error {
 public:
  explicit DegenerateLeadingCoefficient(const std::string& what)
      : Error(ExitCode::kDegeneracy, what) {}
};

class MixedDegreeBatch : public Error {
 public:
  explicit MixedDegreeBatch(const std::string& what)
      : Error(ExitCode::kDegeneracy, what) {}
};

class DegenerateFit : public Error {
 public:
  explicit DegenerateFit(const std::string& what)
      : Error(ExitCode::kDegeneracy, what) {}
};

class ExpressionError : public Error {
 public:
  explicit ExpressionError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class IllegalState : public Error {
 public:
  explicit IllegalState(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class LengthMismatch : public Error {
 public:
  explicit LengthMismatch(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

}  // namespace rootdensity
