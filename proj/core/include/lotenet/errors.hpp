#pragma once

#include <stdexcept>
#include <string>

namespace lotenet {

/// Base class for all errors raised by the engine.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor extents do not line up (contraction mismatch, bad reshape, ...).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An axis or element index is out of range or duplicated.
class IndexError : public Error {
public:
    using Error::Error;
};

/// An API was called in a way its contract forbids (consumed tape, foreign
/// loss, mismatched block grid, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A binary stream does not follow its documented layout (LTT/LTNC/PNG).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A dataset could not be loaded or is semantically inconsistent.
class DataError : public Error {
public:
    using Error::Error;
};

/// A run configuration is invalid (failed shape plan, bad key, bad value).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A metric is undefined for the given inputs (e.g. single-class AUC).
class MetricError : public Error {
public:
    using Error::Error;
};

}  // namespace lotenet
