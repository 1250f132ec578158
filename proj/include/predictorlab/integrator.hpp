#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "predictorlab/signals.hpp"

namespace predictorlab {

// One classical fourth-order Runge-Kutta step of x' = rhs(t, x, t_hold).
// t_hold is the step midpoint: right-hand sides read piecewise-constant
// inputs there, since a step never straddles an input breakpoint and its end
// point may coincide with one.
template <class Rhs>
Vector rk4_step(const Rhs& rhs, double t, const Vector& x, double h) {
    const double t_hold = t + h / 2;
    const Vector k1 = rhs(t, x, t_hold);
    const Vector k2 = rhs(t + h / 2, x + (h / 2) * k1, t_hold);
    const Vector k3 = rhs(t + h / 2, x + (h / 2) * k2, t_hold);
    const Vector k4 = rhs(t + h, x + h * k3, t_hold);
    return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Fixed-step RK4 from t0 to t1 with steps no longer than h_max. Steps are
// shortened so that none straddles a breakpoint (sorted ascending).
template <class Rhs>
Vector rk4_integrate(const Rhs& rhs, double t0, Vector x, double t1, double h_max,
                     std::span<const double> breakpoints = {}) {
    auto next_bp = std::upper_bound(breakpoints.begin(), breakpoints.end(), t0);
    double t = t0;
    while (t < t1) {
        double target = t1;
        while (next_bp != breakpoints.end() && *next_bp <= t) ++next_bp;
        if (next_bp != breakpoints.end() && *next_bp < target) target = *next_bp;
        const auto steps = std::max<long>(1, static_cast<long>(std::ceil((target - t) / h_max - 1e-9)));
        const double h = (target - t) / static_cast<double>(steps);
        for (long k = 0; k < steps; ++k) {
            const double ts = t + static_cast<double>(k) * h;
            const double te = (k + 1 == steps) ? target : ts + h;
            x = rk4_step(rhs, ts, x, te - ts);
        }
        t = target;
    }
    return x;
}

}  // namespace predictorlab
