#include "lvnd/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lvnd/dynamics.hpp"
#include "lvnd/error.hpp"
#include "lvnd/rk4.hpp"

namespace lvnd {

namespace {

double operator_inf_norm(const DispersalOperator& op) {
    const Eigen::MatrixXd& k = op.convolution();
    double norm = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        norm = std::max(norm, k.row(i).cwiseAbs().sum() + std::abs(op.loss()[i]));
    }
    return norm;
}

double sup_abs(const CoefficientField& f, int samples) {
    const Range r = field_range(f, samples);
    return std::max(std::abs(r.lower), std::abs(r.upper));
}

}  // namespace

LinearPeriodMap::LinearPeriodMap(std::shared_ptr<const DispersalOperator> op, double nu, CoefficientField l,
                                 std::optional<double> dt)
    : op_(std::move(op)), nu_(nu), l_(std::move(l)), dt_(dt.value_or(default_dt(l_.period()))) {
    if (!op_) throw ValidationError("linear period map needs a dispersal operator");
    if (l_.size() != op_->size()) throw ValidationError("coefficient l does not match the operator size");
    if (!(nu > 0.0)) throw ValidationError("dispersal rate must be positive");
    if (!(dt_ > 0.0)) throw ValidationError("time step must be positive");
    const double stiffness = dt_ * (nu_ * operator_inf_norm(*op_) + sup_abs(l_, 64));
    if (stiffness > 2.7) {
        std::ostringstream msg;
        msg << "RK4 step unstable for the linear period map: dt * (nu |A| + sup|l|) = " << stiffness << " > 2.7";
        throw NumericalError(msg.str());
    }
}

Eigen::VectorXd LinearPeriodMap::apply(const Eigen::VectorXd& w) const {
    if (w.size() != static_cast<Eigen::Index>(size())) throw ValidationError("period map: vector size mismatch");
    FieldCache cache(l_, dt_);
    Eigen::VectorXd kw(w.size());
    const Eigen::MatrixXd& k = op_->convolution();
    const Eigen::VectorXd& loss = op_->loss();
    auto f = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& d) {
        kw.noalias() = k * x;
        d = nu_ * (kw - loss.cwiseProduct(x)) + cache.at(t).cwiseProduct(x);
    };
    Eigen::VectorXd y = w;
    Rk4<Eigen::VectorXd> rk4;
    rk4.advance(f, 0.0, period(), dt_, y, [](double t, const Eigen::VectorXd& x) {
        if (!x.allFinite()) throw NonFiniteError("period map: non-finite value at t = " + std::to_string(t));
    });
    return y;
}

Eigen::MatrixXd LinearPeriodMap::matrix() const {
    const auto n = static_cast<Eigen::Index>(size());
    FieldCache cache(l_, dt_);
    const Eigen::MatrixXd& k = op_->convolution();
    const Eigen::VectorXd& loss = op_->loss();
    Eigen::MatrixXd kw(n, n);
    auto f = [&](double t, const Eigen::MatrixXd& x, Eigen::MatrixXd& d) {
        kw.noalias() = k * x;
        const Eigen::VectorXd rate = cache.at(t) - nu_ * loss;
        d = nu_ * kw + rate.asDiagonal() * x;
    };
    Eigen::MatrixXd y = Eigen::MatrixXd::Identity(n, n);
    Rk4<Eigen::MatrixXd> rk4;
    rk4.advance(f, 0.0, period(), dt_, y, [](double t, const Eigen::MatrixXd& x) {
        if (!x.allFinite()) throw NonFiniteError("period matrix: non-finite value at t = " + std::to_string(t));
    });
    return y;
}

std::string to_string(Existence e) {
    switch (e) {
        case Existence::Exists: return "exists";
        case Existence::Indeterminate: return "indeterminate";
        case Existence::Absent: return "absent";
    }
    return "unknown";
}

namespace {

// One normalized power step. Returns the sup-norm change of the iterate.
double power_step(const Eigen::VectorXd& y, Eigen::VectorXd& w) {
    const double mu = y.maxCoeff();
    if (!(mu > 0.0) || !std::isfinite(mu)) throw NumericalError("power iteration lost positivity");
    const Eigen::VectorXd next = y / mu;
    const double change = sup_norm(next - w);
    w = next;
    return change;
}

void classify(SpectralResult& r, const DispersalOperator& op, double nu, const CoefficientField& l) {
    const Eigen::VectorXd diag = nu * op.diagonal_field() + time_average(l);
    r.max_diagonal = diag.maxCoeff();
    r.gap = r.lambda - r.max_diagonal;
    r.gap_tol = 1e-7 * (1.0 + std::abs(r.lambda));
    if (r.gap > r.gap_tol) {
        r.existence = Existence::Exists;
    } else if (r.gap < -r.gap_tol) {
        r.existence = Existence::Absent;
    } else {
        r.existence = Existence::Indeterminate;
    }
    r.is_principal_eigenvalue = r.existence == Existence::Exists;
}

}  // namespace

SpectralResult principal_spectrum_point(std::shared_ptr<const DispersalOperator> op, double nu,
                                        const CoefficientField& l, const SpectralOptions& options) {
    const LinearPeriodMap map(op, nu, l, options.dt);
    const double period = map.period();
    const auto n = static_cast<Eigen::Index>(map.size());

    SpectralResult r;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    double change = power_step(map.apply(w), w);
    long iterations = 1;

    if (change > options.tolerance) {
        if (map.size() <= options.dense_limit) {
            const Eigen::MatrixXd p = map.matrix();
            // Power iteration on P^(2^s); the matrix is squared whenever a level stalls.
            Eigen::MatrixXd b = p;
            long level_iterations = 0;
            while (change > options.tolerance) {
                if (iterations >= options.max_iterations) {
                    throw ConvergenceError("power iteration did not converge", change);
                }
                change = power_step(b * w, w);
                ++iterations;
                if (++level_iterations >= 200 && change > options.tolerance) {
                    b = b * b;
                    const double scale = b.cwiseAbs().maxCoeff();
                    if (!(scale > 0.0) || !std::isfinite(scale)) throw NumericalError("period matrix degenerate");
                    b /= scale;
                    level_iterations = 0;
                }
            }
            const Eigen::VectorXd y = p * w;
            const double mu = y.sum() / w.sum();
            r.lambda = std::log(mu) / period;
            r.residual = sup_norm(y - mu * w);
        } else {
            Eigen::VectorXd y;
            while (change > options.tolerance) {
                if (iterations >= options.max_iterations) {
                    throw ConvergenceError("power iteration did not converge", change);
                }
                change = power_step(map.apply(w), w);
                ++iterations;
            }
            y = map.apply(w);
            const double mu = y.sum() / w.sum();
            r.lambda = std::log(mu) / period;
            r.residual = sup_norm(y - mu * w);
        }
    } else {
        // The start vector is already an eigenvector (e.g. constants for l constant).
        const Eigen::VectorXd y = map.apply(w);
        const double mu = y.maxCoeff();
        r.lambda = std::log(mu) / period;
        r.residual = sup_norm(y - mu * w);
    }
    r.iterations = iterations;
    r.converged = true;
    r.perron_function = w / w.maxCoeff();
    classify(r, *op, nu, l);
    return r;
}

double lambda0(std::shared_ptr<const DispersalOperator> op, double period, const SpectralOptions& options) {
    const auto zero = CoefficientField::constant(op->size(), period, 0.0);
    return principal_spectrum_point(std::move(op), 1.0, zero, options).lambda;
}

ShiftMonotonicityReport verify_shift_and_monotonicity(std::shared_ptr<const DispersalOperator> op, double nu,
                                                      const CoefficientField& l, const CoefficientField& l_tilde,
                                                      double shift, const SpectralOptions& options,
                                                      int time_samples) {
    if (l.size() != l_tilde.size()) throw ValidationError("l and l_tilde live on different grids");
    Eigen::VectorXd lv(static_cast<Eigen::Index>(l.size()));
    Eigen::VectorXd ltv(lv.size());
    for (int k = 0; k < time_samples; ++k) {
        const double t = l.period() * k / time_samples;
        l.evaluate(t, lv);
        l_tilde.evaluate(t, ltv);
        Eigen::Index node = 0;
        const double worst = (lv - ltv).maxCoeff(&node);
        if (worst > 0.0) {
            std::ostringstream msg;
            msg << "precondition l <= l_tilde violated at t = " << t << ", node " << node;
            throw ValidationError(msg.str());
        }
    }
    ShiftMonotonicityReport rep;
    rep.shift = shift;
    rep.lambda = principal_spectrum_point(op, nu, l, options).lambda;
    rep.lambda_tilde = principal_spectrum_point(op, nu, l_tilde, options).lambda;
    rep.lambda_shifted = principal_spectrum_point(op, nu, l.shifted(shift), options).lambda;
    rep.monotone_slack = rep.lambda_tilde - rep.lambda;
    rep.shift_error = std::abs(rep.lambda_shifted - rep.lambda - shift);
    rep.monotone = rep.monotone_slack >= -rep.tolerance;
    rep.shift_identity = rep.shift_error <= rep.tolerance;
    return rep;
}

ZeroLambdaCertificate zero_lambda_certificate(std::shared_ptr<const DispersalOperator> op, double nu,
                                              const CoefficientField& l,
                                              const std::vector<Eigen::VectorXd>& solution_samples,
                                              const SpectralOptions& options, double residual_tol) {
    if (solution_samples.empty()) throw ValidationError("certificate needs at least one solution sample");
    ZeroLambdaCertificate cert;
    cert.min_value = std::numeric_limits<double>::infinity();
    for (const auto& s : solution_samples) {
        if (s.size() != static_cast<Eigen::Index>(l.size())) throw ValidationError("solution sample size mismatch");
        cert.min_value = std::min(cert.min_value, s.minCoeff());
    }
    if (!(cert.min_value > 0.0)) throw ValidationError("certificate solution is not positive");
    const Eigen::VectorXd& w0 = solution_samples.front();
    const LinearPeriodMap map(op, nu, l, options.dt);
    cert.periodicity_residual = sup_norm(map.apply(w0) - w0) / sup_norm(w0);
    if (cert.periodicity_residual > residual_tol) {
        std::ostringstream msg;
        msg << "certificate solution is not T-periodic: residual " << cert.periodicity_residual;
        throw ValidationError(msg.str());
    }
    cert.abs_lambda = std::abs(principal_spectrum_point(std::move(op), nu, l, options).lambda);
    return cert;
}

}  // namespace lvnd
