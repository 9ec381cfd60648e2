#pragma once

#include <stdexcept>
#include <string>

namespace deepg2p {

// Error categories map onto CLI exit codes (config=2, data=3, numeric=4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

/// Shape or extent mismatch between tensors. Treated as a data error since
/// it almost always originates from inconsistent inputs.
class ShapeError : public DataError {
public:
    using DataError::DataError;
};

/// Non-finite values, degenerate statistics, failed numeric preconditions.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace deepg2p
