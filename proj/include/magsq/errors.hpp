// errors.hpp: exception types shared by the library and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace magsq {

// Bad configuration text, unknown key, missing unit, invalid value.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Precondition violated by a caller (dimension mismatch, non-Hermitian input, ...).
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: step-size underflow, lost positivity, non-PSD input, zero probability.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace magsq
