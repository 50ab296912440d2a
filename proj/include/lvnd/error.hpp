#pragma once

#include <stdexcept>
#include <string>

namespace lvnd {

/// Machine-readable failure category, used for CLI exit codes and JSON error lines.
enum class ErrorKind {
    Validation,
    Negativity,
    NonFinite,
    Hypothesis,
    Convergence,
    Numerical,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

/// A state component dropped below the clamp threshold; usually dt is too large.
struct NegativityError : Error {
    explicit NegativityError(const std::string& what) : Error(ErrorKind::Negativity, what) {}
};

struct NonFiniteError : Error {
    explicit NonFiniteError(const std::string& what) : Error(ErrorKind::NonFinite, what) {}
};

/// A hypothesis needed by the requested construction does not hold.
struct HypothesisError : Error {
    explicit HypothesisError(const std::string& what) : Error(ErrorKind::Hypothesis, what) {}
};

struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double last_residual)
        : Error(ErrorKind::Convergence, what), last_residual_(last_residual) {}
    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace lvnd
