#pragma once

#include <stdexcept>
#include <string>

namespace wavemc {

// Every library error carries a stable event code. The CLI prints
// "<code>: <message>" on the diagnostic stream and maps codes onto
// process exit codes (see tools/).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Bad configuration or bad library inputs (exit code 2).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("E_CONFIG", message) {}
};

// Syntax/semantic error in an expression string. `position` is the
// 1-based column in the source text.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& message, int position)
      : ConfigError(message + " at position " + std::to_string(position)),
        position_(position) {}

  int position() const noexcept { return position_; }

 private:
  int position_;
};

// Non-finite values, failed evaluations, geometry breakdowns (exit code 3).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error("E_NUMERIC", message) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& message) : Error("E_NUMERIC", message) {}
};

// Truncated-exit fraction above the rejection threshold (exit code 3).
class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& message) : Error("E_TRUNC", message) {}
};

// CFL violation or instability in the finite-difference solver (exit code 3).
class CflError : public Error {
 public:
  explicit CflError(const std::string& message) : Error("E_CFL", message) {}
};

}  // namespace wavemc
