#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ere {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Numerical tolerances shared across the library. All defaults are
// overridable per call site; relative cutoffs are taken against the
// largest singular value of the object they gate.
struct Tolerances {
    double symplectic = 1e-8;   // ||M^T J M - J|| acceptance for symplectic matrices
    double rank = 1e-10;        // frame rank cutoff (relative)
    double crossing = 1e-7;     // singular-value cutoff for subspace intersections
    double form = 1e-6;         // eigenvalue cutoff for crossing-form inertia
    double drift = 1e-9;        // resymplectify fundamental solutions past this residual
    double time_loc = 1e-10;    // crossing localization, relative to interval length
    double unit_circle = 1e-7;  // | |lambda| - 1 | band for spectral classification
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed matrices, out-of-family requests.
struct DomainError : Error {
    using Error::Error;
};

// A frame failed its rank or isotropy invariant.
struct InvalidFrameError : Error {
    using Error::Error;
};

// An iteration failed to settle within its budget (truncation horizons,
// step-size underflow, non-decaying tails).
struct ConvergenceError : Error {
    using Error::Error;
};

// Two independent computations of the same quantity disagree.
struct InternalConsistencyError : Error {
    using Error::Error;
};

} // namespace ere
