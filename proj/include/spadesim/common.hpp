#ifndef SPADESIM_COMMON_HPP
#define SPADESIM_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace spadesim {

using cd = std::complex<double>;

inline constexpr const char* kVersion = "0.1.0";

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user-facing input (bad grids, bad parameters, malformed files).
// The CLI maps these to exit code 1.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// A shift or scene fell outside the representable grid support.
class OutOfSupportError : public InputError {
public:
    explicit OutOfSupportError(const std::string& msg) : InputError(msg) {}
};

// Numerical-stability failures (step instability, truncation instability,
// singular solver equations).  The CLI maps these to exit code 2.
class StabilityError : public Error {
public:
    explicit StabilityError(const std::string& msg) : Error(msg) {}
};

class IllConditionedError : public StabilityError {
public:
    explicit IllConditionedError(const std::string& msg) : StabilityError(msg) {}
};

} // namespace spadesim

#endif
