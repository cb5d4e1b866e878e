#pragma once

#include <stdexcept>
#include <string>

namespace rulelist {

// Error taxonomy. The CLI maps each class to a distinct exit code.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data: missing columns, bad label values, feature mismatch.
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// No antecedent survived mining.
struct mining_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal invariant violation (capture/posterior inconsistency).
struct state_error : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace rulelist
