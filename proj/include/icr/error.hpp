#pragma once

#include <stdexcept>
#include <string>

namespace icr {

/// Bad input: violated preconditions, malformed files, invalid parameter combinations.
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// The inputs were well formed but the requested quantity cannot be computed from them.
class ComputeError : public std::runtime_error {
public:
    explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace icr
