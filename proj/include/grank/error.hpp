#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace grank {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input (edge lists, visit logs, counts snapshots).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration hit the iteration cap before reaching tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::size_t iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

} // namespace grank
