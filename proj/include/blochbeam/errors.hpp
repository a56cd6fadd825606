#pragma once

#include <stdexcept>
#include <string>

namespace blochbeam {

// Violated mathematical precondition (closed orbit, simple band, simple
// curve, spectral gap). Maps to process exit code 2.
struct assumption_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed configuration or input data. Maps to process exit code 2.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical result failed its accuracy guard. Maps to process exit code 3.
struct accuracy_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem or serialization failure. Maps to process exit code 3.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const assumption_error*>(&e) != nullptr) return 2;
    if (dynamic_cast<const input_error*>(&e) != nullptr) return 2;
    return 3;
}

}  // namespace blochbeam
