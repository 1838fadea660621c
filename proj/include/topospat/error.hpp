#ifndef TOPOSPAT_ERROR_HPP
#define TOPOSPAT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace topospat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (non-numeric cell, bad header).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t row, std::size_t column)
        : Error(msg + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row), column_(column) {}

    std::size_t row() const { return row_; }
    std::size_t column() const { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Files are individually well formed but disagree with each other.
class LoadError : public Error {
public:
    using Error::Error;
};

/// A value violates a documented invariant (NaN, duplicate name, negative count).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An argument is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An operation is applied to an object in the wrong state.
class StateError : public Error {
public:
    using Error::Error;
};

/// Vector lengths disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Point coordinates do not fit the requested graph construction.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Two functional summaries live on different domains.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A statistic is undefined for the given input (zero variance, single class, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

} // namespace topospat

#endif
