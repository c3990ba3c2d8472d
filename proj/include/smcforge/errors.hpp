#pragma once

#include <stdexcept>
#include <string>

namespace smcforge {

/// Bad arguments, violated invariants, malformed configs. Maps to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem / stream failures. Maps to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace smcforge
