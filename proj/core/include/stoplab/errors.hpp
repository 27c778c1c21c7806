#pragma once

#include <stdexcept>
#include <string>

namespace stoplab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent inputs: bad trees, rewards, policies, files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A solver could not produce a trustworthy answer. Carries a condition
// report in the message; never thrown silently in place of a result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// An enumeration or expansion would exceed the configured node/count cap.
class CapExceededError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace stoplab
