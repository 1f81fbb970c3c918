#pragma once

#include <stdexcept>
#include <string>

namespace degenlab {

/// Argument outside its documented domain (bad dimension, nonpositive count, ...).
class invalid_argument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition on the inputs does not hold (missing metadata,
/// unbounded potential, ...).
class precondition_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested computation exceeds a configured budget (tensor grid, dense matrix size).
class resource_limit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation is outside the supported scope (e.g. Moreau envelope of a
/// non-convex potential).
class unsupported_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver failed to reach its tolerance; carries the final residual.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_ = 0.0;
};

/// Function evaluated where the potential is infinite.
class domain_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace degenlab
