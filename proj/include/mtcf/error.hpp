#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mtcf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition in the numerical core.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Scenario file or field could not be understood.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite propagator state. Carries the seed of the offending trajectory.
class OverflowError : public Error {
public:
    OverflowError(const std::string& what, std::uint64_t seed) : Error(what), seed_(seed) {}
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Two traces do not share the same (t, t') grid.
class GridMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace mtcf
