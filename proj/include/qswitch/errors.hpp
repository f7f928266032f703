#pragma once

#include <stdexcept>
#include <string>

namespace qswitch {

/// A precondition on a parameter or configuration was violated.
class invalid_parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested infinite-horizon quantity does not exist for this config.
class instability_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The operation belongs to a different model family (e.g. n != 2).
class wrong_model_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The engine does not support this combination of features.
class unsupported_model_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative computation failed to converge or lost its guarantees.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested computation exceeds a configured resource cap.
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qswitch
