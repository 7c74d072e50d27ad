#pragma once

#include <stdexcept>
#include <string>

namespace gzsl {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor/layer dimension mismatch; message names the offending shapes.
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// A documented precondition was violated by the caller.
struct ContractError : Error {
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Unreadable, corrupt or inconsistent data on disk (datasets, checkpoints,
// manifests). Maps to CLI exit code 2.
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numeric failure: non-finite values where finite ones are required,
// diverging training, failed gradient checks. Maps to CLI exit code 3.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

} // namespace gzsl
