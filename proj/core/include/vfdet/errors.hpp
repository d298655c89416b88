#pragma once

#include <stdexcept>
#include <string>

namespace vfdet {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied data: malformed files, out-of-range parameters,
// incompatible artifacts. Maps to a distinct process exit code in the CLI.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

// Malformed file contents; carries a human-readable location
// (line number or byte offset) in the message.
class ParseError : public InputError {
public:
    explicit ParseError(const std::string& what) : InputError(what) {}
};

// A numeric routine failed to meet its own contract (unstable filter
// section, optimizer out of iterations). Indicates a bug or an extreme
// input, not a user mistake.
class InternalError : public Error {
public:
    explicit InternalError(const std::string& what) : Error(what) {}
};

}  // namespace vfdet
