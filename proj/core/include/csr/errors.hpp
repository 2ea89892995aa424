#pragma once

#include <stdexcept>
#include <string>

namespace csr {

/// A feature vector could not be normalized (zero norm or a cancelling merge).
class DegenerateFeature : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input that violates a documented precondition of a library call.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the world cannot satisfy a generation or shuffle request.
class InfeasibleRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csr
