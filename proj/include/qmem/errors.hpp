#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

// Invalid parameters, domains, preconditions.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Timed-event construction problems (overlaps, DD overflow, rephasing impossible).
struct ScheduleError : ParameterError {
    using ParameterError::ParameterError;
};

// Runtime numeric failures (non-convergence, no root, non-finite values).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qmem
