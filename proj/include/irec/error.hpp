#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace irec {

enum class ErrorCode {
  UnknownInterface,
  ValidityExceedsCap,
  LoopDetected,
  LinkMismatch,
  BadChain,
  UnknownAsKey,
  MissingMetric,
  ParseError,
  DuplicateLink,
  InfeasibleParameters,
  UnknownEgressInterface,
  Disconnected,
  NotFound,
  HashMismatch,
  TooLarge,
  StepBudgetExceeded,
  MemoryBudgetExceeded,
  ConfigError,
  UnknownAs,
  MissingResult,
  IoError,
};

std::string_view error_name(ErrorCode code);

/// Process exit code used by the CLI for each error kind.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure that remembers the 1-based input line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace irec
