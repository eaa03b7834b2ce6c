#pragma once

#include <stdexcept>
#include <string>

namespace margins {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: ragged columns, zero columns under normalization,
/// mismatched dimensions, out-of-range parameters.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An exact oracle was asked to run past its enumeration or size budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

/// A theorem or operation does not apply to this instance (wrong sign of
/// the margin, empty target set, or a parameter inside the ill-posed band).
class Inapplicable : public Error {
public:
    using Error::Error;
};

}  // namespace margins
