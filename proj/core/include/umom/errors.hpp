#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace umom {

// Base type for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

// Thrown when an exact enumeration would exceed its cap; carries the number
// of evaluations the request would have needed (saturated at uint64 max).
class CapExceeded : public Error {
public:
    CapExceeded(const std::string& what, std::uint64_t required)
        : Error(what), required_(required) {}
    std::uint64_t required() const noexcept { return required_; }

private:
    std::uint64_t required_;
};

// Requested absolute moment does not exist for the distribution.
class MomentUndefined : public Error {
public:
    explicit MomentUndefined(const std::string& what) : Error(what) {}
};

// A sample value is not an atom of the finite-support law.
class NotInSupport : public Error {
public:
    explicit NotInSupport(const std::string& what) : Error(what) {}
};

// Config-file problem; carries the offending key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string key)
        : Error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(what) {}
};

class InsufficientPoints : public FitError {
public:
    explicit InsufficientPoints(const std::string& what) : FitError(what) {}
};

class NonpositiveSlope : public FitError {
public:
    explicit NonpositiveSlope(const std::string& what) : FitError(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace umom
