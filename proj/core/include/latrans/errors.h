#ifndef LATRANS_ERRORS_H_
#define LATRANS_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latrans {

// Arguments violate an operation's preconditions (bad ids, size mismatch).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value outside the domain of a function, e.g. the gradient of a
// zero-probability sequence.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A configured budget (enumeration size, retry count) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document. line() is 1-based, 0 when not line-oriented.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace latrans

#endif  // LATRANS_ERRORS_H_
