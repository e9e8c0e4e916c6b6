#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace okan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (negative spot, T=0 in d1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Incompatible tensor shapes or widths.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Caller broke an API contract (e.g. backward on a non-scalar).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Data that cannot support the requested statistic (constant column, constant returns).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or config.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t epoch, const std::string& what)
        : Error(what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace okan
