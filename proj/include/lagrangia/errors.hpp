#pragma once

#include <stdexcept>
#include <string>

namespace lagrangia {

// Bad run configuration or malformed user input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unparseable term string, CSV row, or JSON document.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File could not be read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dynamics evaluated at a coordinate singularity.
struct SingularConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model with all coefficients zero where a nonzero model is required.
struct DegenerateModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Hard-thresholding removed every candidate term.
struct EmptyModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Optimizer produced a non-finite iterate or gradient.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lagrangia
