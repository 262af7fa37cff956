#pragma once

#include <stdexcept>
#include <string>

namespace memaudit {

/// Malformed input data (CSV rows, dates, numbers, duplicate keys).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure, e.g. a singular system.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace memaudit
