#pragma once

#include <stdexcept>
#include <string>

namespace skipgan {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration: bad field values, unknown config keys, incompatible
// checkpoint/config combinations. Maps to CLI exit code 1.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input data: truncated archives, bad labels, undecodable images.
struct DataError : Error {
    using Error::Error;
};

// Tensor shape disagreement between caller and callee.
struct ShapeError : Error {
    using Error::Error;
};

// File level problems: missing, unreadable, corrupt or version-mismatched.
struct IoError : Error {
    using Error::Error;
};

// A loss or parameter went non-finite during optimization.
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace skipgan
