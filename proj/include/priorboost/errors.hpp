#pragma once

#include <stdexcept>
#include <string>

namespace priorboost {

// Bad input, configuration, or violated precondition. Maps to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Missing or unreadable/unwritable files. Maps to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-convergence or other numerical breakdown. Maps to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace priorboost
