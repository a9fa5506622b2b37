#pragma once

#include <stdexcept>
#include <string>

namespace binbell {

// Argument outside the physical domain of an operation (non-finite tau, g2 < 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent input data: unsorted streams, corrupt files, empty bins.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration text or parameter set.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sinusoid fit could not be carried out.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace binbell
