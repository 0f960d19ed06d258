#pragma once

#include <stdexcept>
#include <string>

namespace oann {

/// Caller violated a documented precondition (bad index, wrong size, ...).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// An authenticated-decryption check failed. Any component seeing this must
/// treat the backing storage as adversarial and stop.
class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation attempted on an instance that already aborted.
class AbortedError : public std::runtime_error {
 public:
  explicit AbortedError(const std::string& what) : std::runtime_error(what) {}
};

/// Parameter planning could not satisfy its constraints.
class PlanningError : public std::runtime_error {
 public:
  explicit PlanningError(const std::string& what) : std::runtime_error(what) {}
};

/// Bulk initialization failed (capacity, size mismatch, ...).
class SetupError : public std::runtime_error {
 public:
  explicit SetupError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oann
