#pragma once

#include <stdexcept>
#include <string>

namespace bcpg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad sizes, out-of-domain arguments, malformed files.
struct InvalidInputError : Error {
  using Error::Error;
};

// A numeric invariant failed (should not happen on valid inputs).
struct NumericError : Error {
  using Error::Error;
};

// A predictor column is constant within a block (V_Sjj == 0); callers may
// retry after jittering the column.
struct SingularDesignError : NumericError {
  using NumericError::NumericError;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace bcpg
