#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wavepilot {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid scenario, profile or run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

class OutOfDomainError : public Error {
public:
    using Error::Error;
};

// A ray reached a classically forbidden region (negative squared wavenumber
// or negative radicand in the relativistic Hamiltonian).
class EvanescentError : public Error {
public:
    using Error::Error;
};

class StencilError : public Error {
public:
    using Error::Error;
};

// Two neighbouring rays exchanged their order along the wavefront.
class CrossingFault : public Error {
public:
    CrossingFault(std::size_t step, std::size_t left, std::size_t right)
        : Error("ray crossing between rays " + std::to_string(left) + " and " +
                std::to_string(right) + " at step " + std::to_string(step)),
          step_(step), left_(left), right_(right) {}

    std::size_t step() const noexcept { return step_; }
    std::size_t left() const noexcept { return left_; }
    std::size_t right() const noexcept { return right_; }

private:
    std::size_t step_;
    std::size_t left_;
    std::size_t right_;
};

class IdentificationError : public Error {
public:
    using Error::Error;
};

class OracleResolutionError : public Error {
public:
    using Error::Error;
};

}  // namespace wavepilot
