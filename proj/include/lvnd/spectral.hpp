#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lvnd/domain.hpp"
#include "lvnd/fields.hpp"

namespace lvnd {

/// Period map w(0) -> w(T) of the linear equation
///
///     w_t = nu (K w - loss w) + l(t, x) w
///
/// realized by fixed-step RK4.
class LinearPeriodMap {
public:
    LinearPeriodMap(std::shared_ptr<const DispersalOperator> op, double nu, CoefficientField l,
                    std::optional<double> dt = {});

    double period() const { return l_.period(); }
    double dt() const { return dt_; }
    std::size_t size() const { return op_->size(); }
    double nu() const { return nu_; }
    const CoefficientField& coefficient() const { return l_; }
    const DispersalOperator& op() const { return *op_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& w) const;
    /// Dense matrix of the map, integrated as a matrix ODE from the identity.
    Eigen::MatrixXd matrix() const;

private:
    std::shared_ptr<const DispersalOperator> op_;
    double nu_;
    CoefficientField l_;
    double dt_;
};

enum class Existence { Exists, Indeterminate, Absent };

std::string to_string(Existence e);

struct SpectralOptions {
    std::optional<double> dt;
    double tolerance = 1e-13;          // relative sup-norm residual of the power iteration
    long max_iterations = 100000;
    std::size_t dense_limit = 256;     // assemble the period matrix up to this size
};

struct SpectralResult {
    double lambda = 0.0;
    Eigen::VectorXd perron_function;   // unit sup-norm, at t = 0
    double gap = 0.0;                  // lambda - max(nu m + time average of l)
    double gap_tol = 0.0;
    double max_diagonal = 0.0;         // max(nu m + time average of l)
    Existence existence = Existence::Indeterminate;
    bool is_principal_eigenvalue = false;
    long iterations = 0;
    double residual = 0.0;             // ||P phi - e^{lambda T} phi||_sup
    bool converged = false;
};

/// lambda = (1/T) log of the spectral radius of the period map, by power
/// iteration from the constant field 1.
SpectralResult principal_spectrum_point(std::shared_ptr<const DispersalOperator> op, double nu,
                                        const CoefficientField& l, const SpectralOptions& options = {});

/// lambda(1, 0) for the regime of `op`: negative for DirichletType, 0 otherwise.
double lambda0(std::shared_ptr<const DispersalOperator> op, double period = 1.0, const SpectralOptions& options = {});

struct ShiftMonotonicityReport {
    double lambda = 0.0;
    double lambda_tilde = 0.0;
    double lambda_shifted = 0.0;
    double shift = 0.0;
    double monotone_slack = 0.0;       // lambda_tilde - lambda
    double shift_error = 0.0;          // |lambda_shifted - lambda - shift|
    bool monotone = false;             // slack >= -tolerance
    bool shift_identity = false;       // error <= tolerance
    double tolerance = 1e-8;
};

/// Checks lambda(nu, l) <= lambda(nu, l_tilde) and lambda(nu, l + c) = lambda(nu, l) + c.
ShiftMonotonicityReport verify_shift_and_monotonicity(std::shared_ptr<const DispersalOperator> op, double nu,
                                                      const CoefficientField& l, const CoefficientField& l_tilde,
                                                      double shift, const SpectralOptions& options = {},
                                                      int time_samples = 64);

struct ZeroLambdaCertificate {
    double abs_lambda = 0.0;
    double periodicity_residual = 0.0; // ||P w0 - w0||_sup / ||w0||_sup
    double min_value = 0.0;
};

/// |lambda(nu, l)| given a positive T-periodic solution of the linear
/// equation, supplied as samples over one period (first sample at t = 0).
ZeroLambdaCertificate zero_lambda_certificate(std::shared_ptr<const DispersalOperator> op, double nu,
                                              const CoefficientField& l,
                                              const std::vector<Eigen::VectorXd>& solution_samples,
                                              const SpectralOptions& options = {}, double residual_tol = 1e-6);

}  // namespace lvnd
