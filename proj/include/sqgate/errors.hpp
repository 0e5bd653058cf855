#pragma once

#include <stdexcept>
#include <string>

namespace sqgate {

// Bad physical or configuration input (maps to CLI exit code 1).
struct InvalidParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure inside a numerical routine (maps to CLI exit code 2).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The biased potential did not produce exactly four local minima.
struct FourWellStructureError : NumericError {
  int wells_found;
  explicit FourWellStructureError(int found)
      : NumericError("four-well structure lost: found " +
                     std::to_string(found) + " minima instead of 4"),
        wells_found(found) {}
};

// No eigenstate passed the well-dominance threshold for some well, so the
// computational basis cannot be assigned. Sweeps record eta = 1 instead of
// aborting.
struct ComputationalBasisError : NumericError {
  using NumericError::NumericError;
};

struct IntegrationError : NumericError {
  using NumericError::NumericError;
};

struct NoCouplingError : NumericError {
  using NumericError::NumericError;
};

}  // namespace sqgate
