#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace bohm {

// Base for every error the library raises; `what()` carries the diagnostic.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rejected input: a recipe, grid, region or config that cannot be honoured.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A request outside the time range a wavefunction history or trajectory covers.
class OutOfRange : public Error {
public:
    using Error::Error;
};

// Non-finite amplitude produced by the propagator.
class NonFiniteError : public Error {
public:
    NonFiniteError(std::size_t step, double time)
        : Error("non-finite amplitude at evolution step " + std::to_string(step) + " (t=" +
                std::to_string(time) + ")"),
          step_(step),
          time_(time) {}
    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

}  // namespace bohm
