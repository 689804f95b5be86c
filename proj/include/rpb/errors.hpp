#pragma once

#include <stdexcept>
#include <string>

namespace rpb {

// Inputs that are individually well-formed but do not fit together
// (length mismatches, violated algorithm preconditions, bad config files).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An exact enumeration would exceed its configured budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bounded search finished without finding what it was looking for.
class SearchExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rpb
