#pragma once

#include <stdexcept>
#include <string>

namespace vartsp {

// Bad flags, plan files or argument combinations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A request exceeds a fixed resource guard (dense qubit budget, brute-force
// size limit).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace vartsp
