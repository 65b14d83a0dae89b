#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace torsion_moments {

/// Input violates an operation's precondition (bad flags, bad descriptor, mismatched rings).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A requested enumeration exceeds its configured budget.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, std::string required)
        : std::runtime_error(what + " (required: " + required + ")"),
          required_(std::move(required)) {}

    const std::string& required() const noexcept { return required_; }

private:
    std::string required_;
};

/// Two routes that must agree did not. Always a bug, never a user error.
class InternalFault : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace torsion_moments
