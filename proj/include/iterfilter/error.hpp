#pragma once

#include <stdexcept>
#include <string>

namespace iterfilter {

/// Precondition violated by caller-supplied data.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Tensor or layer dimensions do not chain.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A NaN or Inf appeared in a forward or backward pass.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A stitch plan left a cloud point without any patch.
class CoverError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Run configuration failed validation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace iterfilter
