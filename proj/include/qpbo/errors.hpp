#pragma once

#include <stdexcept>
#include <string>

namespace qpbo {

// Error taxonomy shared by every module. All derive from std::exception
// types so callers that do not care can catch the standard bases.

// A mode or parameter fell outside the representable block.
class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A parameter outside the mathematical domain of an operator (negative
// fractional order, p < 1, complex input where a real field is required).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two operands live on different lattices or grids of the wrong size.
class MismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition was violated (e.g. gauge construction on a
// field with nonzero mean).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed configuration; `key()` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Unreadable or malformed container / output file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qpbo
