#pragma once

#include <stdexcept>
#include <string>

namespace pevcc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Vector or matrix sizes that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A PevSpec, cost input or config field violates its invariants.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class InfeasibleProblem : public Error {
public:
    using Error::Error;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

// Iterative method hit its cap before the requested tolerance.
class NotConverged : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

inline void require_size(long actual, long expected, const std::string& what)
{
    if (actual != expected)
        throw DimensionError(what + ": expected length " + std::to_string(expected) + ", got " +
                             std::to_string(actual));
}

}  // namespace pevcc
