#pragma once

#include <stdexcept>
#include <string>

namespace ams {

// Error taxonomy shared by every module. The CLI maps ConfigError to exit
// code 1 and NumericError to exit code 2.

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InsufficientPoolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ams
