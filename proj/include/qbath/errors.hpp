// errors.hpp: exception types shared by every qbath module

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qbath {

// Invalid user-supplied parameters (negative temperature, empty bands, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite or structurally inconsistent data.
struct DataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Eigendecomposition failure or an ill-conditioned transform.
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& what, double condition = 0.0)
        : std::runtime_error(what), condition_number(condition) {}
    double condition_number;
};

// A Gaussian characteristic function whose quadratic form is not a state.
struct PhysicalityError : std::runtime_error {
    PhysicalityError(const std::string& what, double a, double abs_g)
        : std::runtime_error(what), a(a), abs_g(abs_g) {}
    double a;
    double abs_g;
};

// Quadrature that did not reach its tolerance.
struct AccuracyError : std::runtime_error {
    AccuracyError(const std::string& what, double estimate)
        : std::runtime_error(what), error_estimate(estimate) {}
    double error_estimate;
};

// |A|^2 - |C|^2 fell below the floor; the generator is not defined there.
struct SingularGeneratorError : NumericalError {
    SingularGeneratorError(const std::string& what, std::size_t index, double denom)
        : NumericalError(what), index(index), denom(denom) {}
    std::size_t index;
    double denom;
};

}  // namespace qbath
