#pragma once

#include <stdexcept>
#include <string>

namespace wtdiag {

// Every failure raised by the library derives from Error so callers can map
// it to an exit status or a per-cell failure without string matching.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);

  // Stable machine-readable category, e.g. "parse", "domain", "io".
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed text input. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message)
      : Error("not_found", message) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message)
      : Error("integrity", message) {}
};

class EncodingError : public Error {
 public:
  explicit EncodingError(const std::string& message)
      : Error("encoding", message) {}
};

// HTTP or socket level failure. status() is the last HTTP status seen, or 0
// when no response arrived.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, int status = 0);
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& message)
      : Error("protocol", message) {}
};

class TimeoutError : public Error {
 public:
  explicit TimeoutError(const std::string& message)
      : Error("timeout", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

// Wraps a failure raised inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }
  const std::string& cause_kind() const noexcept { return cause_kind_; }

 private:
  std::string stage_;
  std::string cause_kind_;
};

}  // namespace wtdiag
