#pragma once

#include <stdexcept>
#include <string>

namespace lyapkit {

// Bad user input: malformed spec files, inconsistent dimensions, flags out of range.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Work refused because it would exceed a configured enumeration or memory cap.
struct resource_limit_error : std::runtime_error {
    explicit resource_limit_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed to converge or hit a singular configuration.
// Raised instead of returning a silently wrong value.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation is meaningful but unsupported for the given object (e.g. a cone
// kind outside the implemented range).
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A supposedly-proved internal inequality failed its cross-check. Always a bug.
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

}
