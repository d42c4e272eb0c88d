#pragma once

#include <stdexcept>
#include <string>

namespace gecko {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument values, inconsistent dimensions, or violated preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported on-disk data (pulse files, configs).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to produce a usable result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A requested step direction has zero norm and cannot be normalized.
class DegenerateStepError : public Error {
 public:
  using Error::Error;
};

/// A parameter step would leave the feasible region (e.g. dt <= 0);
/// the caller must shrink the step size.
class StepRejectedError : public Error {
 public:
  using Error::Error;
};

/// A requested computation exceeds a hard work limit.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace gecko
