#pragma once

#include <cmath>
#include <cstddef>

namespace lvnd {

/// Classical fourth-order Runge-Kutta stepping for y' = f(t, y).
///
/// `Rhs` is any callable `void(double t, const State& y, State& dy)`; State
/// is an Eigen vector or matrix. Work arrays are reused across steps.
template <class State>
class Rk4 {
public:
    template <class Rhs>
    void step(Rhs& f, double t, State& y, double h) {
        k1_.resizeLike(y);
        k2_.resizeLike(y);
        k3_.resizeLike(y);
        k4_.resizeLike(y);
        tmp_.resizeLike(y);
        f(t, y, k1_);
        tmp_ = y + (0.5 * h) * k1_;
        f(t + 0.5 * h, tmp_, k2_);
        tmp_ = y + (0.5 * h) * k2_;
        f(t + 0.5 * h, tmp_, k3_);
        tmp_ = y + h * k3_;
        f(t + h, tmp_, k4_);
        y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

    /// Advance from t0 to t1 with steps of dt; the last step is shortened so
    /// t1 is hit exactly. `after_step(t, y)` runs after every step.
    template <class Rhs, class AfterStep>
    void advance(Rhs& f, double t0, double t1, double dt, State& y, AfterStep&& after_step) {
        const double span = t1 - t0;
        if (span <= 0.0) return;
        const double ratio = span / dt;
        auto steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
        if (steps == 0) steps = 1;
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = t0 + static_cast<double>(k) * dt;
            const double h = (k + 1 == steps) ? t1 - t : dt;
            step(f, t, y, h);
            after_step(k + 1 == steps ? t1 : t + h, y);
        }
    }

    template <class Rhs>
    void advance(Rhs& f, double t0, double t1, double dt, State& y) {
        advance(f, t0, t1, dt, y, [](double, const State&) {});
    }

private:
    State k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace lvnd
