// errors.hpp — Exception types shared across the library

#pragma once

#include <stdexcept>

namespace ctqw {

// Requested problem size exceeds a hard resource guard.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical integration left its validity envelope (norm or trace blow-up).
struct InstabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An optimizer bracket holds no interior minimum.
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ctqw
