#pragma once

#include <stdexcept>

namespace ssar {

/// Malformed or unusable input data (files, columns, missing values, windows).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical invariant broke during estimation (non-PSD forms, non-stationary fits).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ssar
