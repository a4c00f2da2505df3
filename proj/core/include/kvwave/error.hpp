#pragma once

#include <stdexcept>
#include <string>

namespace kvwave {

// Argument outside the mathematical domain of an operation (x outside [0, L],
// lambda = 0 for the branch exponents, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent input: config files, grid/config mismatch,
// dimension mismatch.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed (factorization, eigensolver, root finder).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kvwave
