#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sfgnn {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorCode {
  kParameter,      // invalid argument value
  kShape,          // dimension mismatch
  kFormat,         // malformed input file (CSV, manifest)
  kParse,          // malformed graph text
  kLookup,         // unknown id or name
  kState,          // object not in a usable state (missing annotations, NaN parameters)
  kConfiguration,  // parameters do not cover the graph
  kData,           // invalid training data (e.g. non-grammatical target sequence)
  kDivergence,     // non-finite value during optimization
  kIo,             // filesystem failure
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when an optimization produces a non-finite value. `step` is the
/// iteration, epoch, or timestep at which it happened.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what);

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Malformed text input; `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace sfgnn
