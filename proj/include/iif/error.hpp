#pragma once

#include <stdexcept>
#include <string>

namespace iif {

/// Base of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside an operation's domain (bad sizes, out-of-range values).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input is valid but statistically degenerate (zero variance, empty class).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Numerical routine failed to converge within its iteration budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable input file.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace iif
