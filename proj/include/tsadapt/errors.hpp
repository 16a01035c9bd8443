#pragma once

#include <stdexcept>
#include <string>

namespace tsadapt {

// Bad inputs: unreadable files, malformed data, dimension mismatches.
// Maps to CLI exit code 2.
class InvalidInput : public std::runtime_error {
public:
    explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values produced during computation. Maps to CLI exit code 1.
class NumericFailure : public std::runtime_error {
public:
    explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tsadapt
