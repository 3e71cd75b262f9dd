#pragma once

#include <stdexcept>
#include <string>

namespace wassid {

// Numeric failure as opposed to a malformed argument. Callers that can still
// produce a partial artifact catch this and report a written-but-failed run.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Refusal to invert or factor a matrix; carries the condition estimate.
class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}

  double condition() const { return condition_; }

 private:
  double condition_;
};

}  // namespace wassid
