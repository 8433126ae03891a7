#pragma once

#include <stdexcept>
#include <string>

namespace ebdg {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied input was violated (bad geometry, non-SPD
/// weight, length mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A dense factorization or iteration failed where it should not.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A time-marching run blew up (state max-norm exceeded the divergence cap).
class UnstableRunError : public Error {
 public:
  UnstableRunError(const std::string& what, long steps, double max_norm)
      : Error(what), steps_(steps), max_norm_(max_norm) {}

  long steps() const noexcept { return steps_; }
  double max_norm() const noexcept { return max_norm_; }

 private:
  long steps_;
  double max_norm_;
};

}  // namespace ebdg
