#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tfm {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes, modes or ranks that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite input, rank deficiency, degenerate spectra.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Failure to open, read or write a file.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed tensor-series file. `offset()` is the byte position where the
/// problem was detected.
class FormatError : public IoError {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : IoError(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Header dimensions disagree with the payload (truncated or oversized file,
/// zero-sized dimension, overflow).
class LayoutError : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace tfm
