#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alkit {

// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error { using Error::Error; };
class NotFoundError : public Error { using Error::Error; };
class AlreadyLabeledError : public Error { using Error::Error; };
class ReentrantUpdateError : public Error { using Error::Error; };
class DegenerateLabelsError : public Error { using Error::Error; };
class UntrainedError : public Error { using Error::Error; };
class EmptyInputError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class ExhaustedError : public Error { using Error::Error; };
class ProtocolError : public Error { using Error::Error; };
class SplitError : public Error { using Error::Error; };
class SeedingError : public Error { using Error::Error; };
class AbortedSessionError : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };

// Malformed LIBSVM input. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace alkit
