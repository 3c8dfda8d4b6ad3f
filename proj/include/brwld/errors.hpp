#pragma once

#include <stdexcept>
#include <string>

namespace brwld {

// Invalid model or configuration input (maps to CLI exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation called for the wrong Schroeder/Boettcher regime.
class RegimeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Monte Carlo run could not produce the requested sample (exit code 3).
class SimulationAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Population cap or memory bound exceeded (exit code 4).
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace brwld
