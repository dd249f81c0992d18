#pragma once

#include <stdexcept>
#include <string>

namespace torsion {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A linear system or closed-form denominator collapsed below tolerance.
class DegenerateSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mesh construction produced inverted or badly shaped triangles.
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear solve failed or did not reach the requested residual.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares fit of E(t) was ill-conditioned or left a large residual.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace torsion
