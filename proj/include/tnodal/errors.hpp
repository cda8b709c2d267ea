#pragma once

#include <stdexcept>
#include <string>

namespace tnodal {

/// Precondition violated by a caller-supplied argument (degree, step, range).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation point sits on a zero of the vector field.
class DegeneratePointError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Sample whose V-tangent set is not a finite point set (e.g. Vf identically zero).
class DegenerateSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FieldEvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quadrature did not settle under node doubling.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tnodal
