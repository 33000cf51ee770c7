#pragma once

#include <stdexcept>
#include <string>

namespace pec {

// Bad argument value (singular matrix, zero inverse, no root in range).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller misuse: mismatched fields, wrong lengths, bad flags.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Brute-force size caps.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
    InfeasibleError(const std::string &msg, int idx = -1) : std::runtime_error(msg), index(idx) {}
    int index; // offending constraint, -1 if unknown
};

} // namespace pec
