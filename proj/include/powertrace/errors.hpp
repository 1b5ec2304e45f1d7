#pragma once

#include <stdexcept>
#include <string>

namespace powertrace {

// Base of every error thrown by the library. The CLI maps these to nonzero
// exit codes; tests match on the concrete subclass.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition (shape, range, Hermiticity, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operator or circuit would exceed the configured qubit cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Iterative routine failed to converge or produced non-finite output.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A polynomial handed to the singular value transform breaks its
// admissibility conditions (parity, boundedness).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A lower-bound or reduction instance cannot be built from the given inputs.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// An estimate is too close to a singular point (log of zero, division by a
// near-zero denominator) to report a finite error bar.
class UnreliableEstimateError : public Error {
 public:
  using Error::Error;
};

}  // namespace powertrace
