#pragma once

#include <stdexcept>
#include <string>

namespace sparsear {

// Base class for all library errors. Subclasses mirror the failure modes of
// the public operations; the CLI maps them onto exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Data/shape problems (bad input, short records, malformed files).
class DataError : public Error {
public:
    using Error::Error;
};

// Numerical problems (instability, rank deficiency, failed iterations).
class NumericalError : public Error {
public:
    using Error::Error;
};

class UnstableModel : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InvalidLength : public DataError {
public:
    using DataError::DataError;
};

class TooShort : public DataError {
public:
    using DataError::DataError;
};

class TooLarge : public DataError {
public:
    using DataError::DataError;
};

class NotSufficientlyStable : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class RankDeficient : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InvalidConfig : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t row, const std::string& detail)
        : DataError("parse error at row " + std::to_string(row) + ": " + detail), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class ColumnNotFound : public DataError {
public:
    using DataError::DataError;
};

class NonPositiveForLog : public DataError {
public:
    using DataError::DataError;
};

}  // namespace sparsear
