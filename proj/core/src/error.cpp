#include "wtdiag/error.hpp"

#include <utility>

namespace wtdiag {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(message), kind_(std::move(kind)) {}

ParseError::ParseError(const std::string& message, std::size_t line)
    : Error("parse",
            line == 0 ? message : "line " + std::to_string(line) + ": " + message),
      line_(line) {}

TransportError::TransportError(const std::string& message, int status)
    : Error("transport", status == 0 ? message
                                     : message + " (HTTP " +
                                           std::to_string(status) + ")"),
      status_(status) {}

StageError::StageError(std::string stage, const Error& cause)
    : Error("stage", stage + ": " + cause.what()),
      stage_(std::move(stage)),
      cause_kind_(cause.kind()) {}

}  // namespace wtdiag
