#pragma once

#include <stdexcept>
#include <string>

namespace sustain {

// Base of every error thrown by the library. Messages are one line and
// name the offending input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: inverted intervals, arity mismatch, missing parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Data that fails a consistency check (mix table rows, CSV schemas).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A function evaluated to NaN or infinity somewhere it must be finite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Refinement ran out of levels before the tolerance was met.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Explicit time step exceeds the stability bound.
class StabilityError : public Error {
 public:
  using Error::Error;
};

// Least-squares design matrix without full column rank.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace sustain
