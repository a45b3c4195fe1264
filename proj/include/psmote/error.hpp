#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>

namespace psmote {

// Raised for malformed inputs and configuration: bad files, schema
// mismatches, out-of-range parameters. The CLI maps it to exit code 2;
// any other exception is treated as an internal failure (exit code 3).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

using WarningHandler = std::function<void(const std::string&)>;

inline WarningHandler& warning_handler() {
    static WarningHandler handler = [](const std::string& msg) {
        std::cerr << "psmote: warning: " << msg << "\n";
    };
    return handler;
}

// Non-fatal diagnostics (clamped parameters, degenerate inputs). Tests may
// swap the handler to capture messages.
inline void warn(const std::string& msg) {
    if (warning_handler()) warning_handler()(msg);
}

}  // namespace psmote
