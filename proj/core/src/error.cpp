#include "sfgnn/error.hpp"

namespace sfgnn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParameter: return "parameter error";
    case ErrorCode::kShape: return "shape error";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kLookup: return "lookup error";
    case ErrorCode::kState: return "state error";
    case ErrorCode::kConfiguration: return "configuration error";
    case ErrorCode::kData: return "data error";
    case ErrorCode::kDivergence: return "divergence error";
    case ErrorCode::kIo: return "io error";
  }
  return "error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

DivergenceError::DivergenceError(std::size_t step, const std::string& what)
    : Error(ErrorCode::kDivergence, what + " (at step " + std::to_string(step) + ")"),
      step_(step) {}

ParseError::ParseError(ErrorCode code, std::size_t line, const std::string& what)
    : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace sfgnn
