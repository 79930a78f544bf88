#pragma once

#include <stdexcept>
#include <string>

namespace galint {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// hess_vv (or a stage Jacobian) is numerically singular
struct DegenerateHessian : Error {
    using Error::Error;
};

// residual failed to drop below tolerance within max_iter
struct NewtonDivergence : Error {
    using Error::Error;
};

struct InvalidDegree : Error {
    using Error::Error;
};

struct UnsupportedSize : Error {
    using Error::Error;
};

// declared quadrature order disagrees with the measured one
struct OrderMismatch : Error {
    using Error::Error;
};

// the two-point boundary value solve did not converge
struct ShootingDivergence : Error {
    using Error::Error;
};

struct InsufficientData : Error {
    using Error::Error;
};

// all rows of a convergence table sit below the error floor
struct ZeroError : Error {
    using Error::Error;
};

struct IoFailure : Error {
    using Error::Error;
};

struct UnknownSystem : Error {
    using Error::Error;
};

}  // namespace galint
