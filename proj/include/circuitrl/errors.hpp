#pragma once

#include <stdexcept>
#include <string>

namespace circuitrl {

// Mismatched moduli, dimensions, or bad run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A node id or index that does not exist.
struct ReferenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A fixed capacity (node budget, sequence length, ...) would be exceeded.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace circuitrl
