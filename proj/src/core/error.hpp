#pragma once

#include <stdexcept>
#include <string>

namespace fgsmbench {

/// Invalid argument to an operation: bad shapes, out-of-range values,
/// incompatible configurations. Maps to FB_ERROR_ARGUMENT at the C boundary.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed data file content (PGM, manifest, checkpoint, report JSON).
/// Maps to FB_ERROR_DATA at the C boundary.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or invalid configuration. A ParseError so callers that only
/// distinguish "bad input text" keep working; the C layer maps it to
/// FB_ERROR_CONFIG.
class ConfigError : public ParseError {
public:
    explicit ConfigError(const std::string& what) : ParseError(what) {}
};

/// Filesystem failure: unreadable input, unwritable output.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fgsmbench
