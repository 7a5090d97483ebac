#pragma once

#include <stdexcept>
#include <string>

namespace spgls {

// Base of the library's error taxonomy. The CLI maps subclasses onto its
// exit codes: ArgumentError -> 2, DataError -> 3, everything else -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or violated preconditions.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed or unusable input data (CSV parsing, missing columns, all-zero
// labels and the like).
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: non-finite values, eigendecomposition breakdown,
// singular normal equations.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Iteration cap exceeded before reaching the requested tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// An internal identity that must hold by construction failed; indicates a
// bug or corrupted inputs rather than a property of the problem.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

// The game's optimal value is an infimum that no finite predictor attains.
class UnattainedError : public Error {
 public:
  using Error::Error;
};

// A recovered equilibrium failed its verification checks.
class VerificationError : public Error {
 public:
  using Error::Error;
};

// The dual certificate has a vanishing corner entry, so no equilibrium can
// be extracted from it.
class DegenerateDualError : public Error {
 public:
  using Error::Error;
};

}  // namespace spgls
