#ifndef TAYLORLAW_ERROR_HPP
#define TAYLORLAW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace taylorlaw {

enum class ErrorKind {
  usage,     // bad flags, incompatible scheme/table, invalid configuration
  parse,     // malformed input text
  data,      // insufficient or degenerate data for a fit
  domain,    // argument outside a function's domain (ln of non-positive, ...)
  io         // unreadable / unwritable file
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(ErrorKind::usage, msg) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(ErrorKind::parse, msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(ErrorKind::domain, msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(ErrorKind::io, msg) {}
};

}  // namespace taylorlaw

#endif  // TAYLORLAW_ERROR_HPP
