#pragma once

#include <stdexcept>
#include <string>

namespace ecpa {

// Error families map 1:1 onto CLI exit codes: argument/usage -> 1,
// data -> 2, numerical (incl. singularity) -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public NumericalError {
 public:
  SingularityError(const std::string& what, double condition_estimate)
      : NumericalError(what), condition_estimate_(condition_estimate) {}
  explicit SingularityError(const std::string& what)
      : NumericalError(what), condition_estimate_(0.0) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace ecpa
