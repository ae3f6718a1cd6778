#pragma once

#include <stdexcept>
#include <string>

namespace plastree {

// Error type thrown on contract violations (bad inputs, degenerate
// geometry, stale handles, ...). Tests assert on this type.
class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& message) {
    throw SimError(message);
}

inline void check(bool condition, const char* message) {
    if (!condition) {
        throw SimError(message);
    }
}

inline void check(bool condition, const std::string& message) {
    if (!condition) {
        throw SimError(message);
    }
}

} // namespace plastree
