#pragma once

#include <stdexcept>

namespace fcslab {

// Root of the library's error hierarchy; the CLI maps subcategories to
// exit statuses.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameters outside an operation's mathematical domain (bad N, s, grid,
// bubble parameters, ...).
struct DomainError : Error {
    using Error::Error;
};

// inverse_transform received coefficients that are not Hermitian-symmetric.
struct NonHermitianInput : Error {
    using Error::Error;
};

// An operation that requires a nonzero field got a (numerically) zero one.
struct ZeroField : Error {
    using Error::Error;
};

// energy_along_ray called with a base point off the Nehari manifold.
struct NotOnManifold : Error {
    using Error::Error;
};

// Ball radius exceeds half the box length, the ball would wrap onto itself.
struct RadiusTooLarge : Error {
    using Error::Error;
};

struct DeltaOutOfRange : Error {
    using Error::Error;
};

struct SolverError : Error {
    using Error::Error;
};
// Energy blew past the divergence guard.
struct Diverged : SolverError {
    using SolverError::SolverError;
};
// Iterate (or every re-drawn initial guess) collapsed to the zero field.
struct DegenerateIterate : SolverError {
    using SolverError::SolverError;
};

// A group failed the structural assumptions (orbit dichotomy, character
// consistency, or missing trivial-character stabilizer witness).
struct AssumptionViolated : Error {
    using Error::Error;
};

// Config-file / flag parsing problems.
struct ParseError : Error {
    using Error::Error;
};

// Malformed field files or CSV inputs.
struct FileFormatError : Error {
    using Error::Error;
};

}  // namespace fcslab
