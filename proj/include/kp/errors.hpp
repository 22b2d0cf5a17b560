#pragma once

#include <stdexcept>
#include <string>

namespace kp {

// Failure classes map onto the CLI exit-code contract:
//   ConfigError -> 2, DataError -> 3, InfeasibleError -> 4, BackendError -> 5.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad parameters or an inconsistent request (flags, epsilon sign, k, d_max, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed or inconsistent input files.
struct DataError : Error {
    using Error::Error;
};

// The requested model cannot have a feasible solution.
struct InfeasibleError : Error {
    using Error::Error;
};

// An external solver or subprocess misbehaved.
struct BackendError : Error {
    using Error::Error;
};

}  // namespace kp
