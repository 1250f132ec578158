#include "predictorlab/observer.hpp"

#include <cmath>

#include "predictorlab/errors.hpp"
#include "predictorlab/linalg.hpp"

namespace predictorlab {

ObserverGains::ObserverGains(const StrictFeedbackPlant& plant, Vector p, double theta)
    : p_(std::move(p)), theta_(theta) {
    if (p_.size() != plant.dim()) throw InvalidArgument("ObserverGains: dimension mismatch");
    if (!(theta_ >= 1.0) || !std::isfinite(theta_)) throw InvalidArgument("ObserverGains: theta must be >= 1");
    const Matrix M = plant.chain_matrix() + p_ * plant.output_vector().transpose();
    if (!check_hurwitz(M).is_hurwitz) throw InvalidArgument("ObserverGains: A + p c' is not Hurwitz");
    scaled_.resize(p_.size());
    for (Eigen::Index i = 0; i < p_.size(); ++i) scaled_(i) = std::pow(theta_, static_cast<double>(i + 1)) * p_(i);
}

ObserverGains::ObserverGains(const LtiPlant& plant, Vector p) : p_(std::move(p)), theta_(1.0) {
    if (p_.size() != plant.dim()) throw InvalidArgument("ObserverGains: dimension mismatch");
    const Matrix M = plant.A + p_ * plant.c.transpose();
    if (!check_hurwitz(M).is_hurwitz) throw InvalidArgument("ObserverGains: A + p c' is not Hurwitz");
    scaled_ = p_;
}

ObserverDerivative observer_rhs(const StrictFeedbackPlant& plant, const ObserverGains& gains, const ObserverState& s,
                                double u_lagged) {
    const int n = plant.dim();
    if (s.z.size() != n || gains.p().size() != n) throw InvalidArgument("observer_rhs: dimension mismatch");
    const double innovation = s.z(0) - s.w;
    ObserverDerivative d;
    d.dz = plant.f(s.z) + gains.scaled() * innovation;
    d.dz.head(n - 1) += s.z.tail(n - 1);
    d.dz(n - 1) += u_lagged;
    // w' = f_1(z_1) + z_2; for n = 1 the chain term is the input itself.
    d.dw = plant.f_component(0, {s.z.data(), 1}) + (n > 1 ? s.z(1) : u_lagged);
    return d;
}

ObserverState observer_jump(const ObserverState& s, double y) { return {s.z, y}; }

ObserverDerivative lti_observer_rhs(const LtiPlant& plant, const Vector& gains_p, const ObserverState& s,
                                    double u_lagged) {
    if (s.z.size() != plant.dim() || gains_p.size() != plant.dim()) {
        throw InvalidArgument("lti_observer_rhs: dimension mismatch");
    }
    const double innovation = plant.c.dot(s.z) - s.w;
    ObserverDerivative d;
    d.dz = plant.A * s.z + plant.B * u_lagged + gains_p * innovation;
    d.dw = plant.c.dot(plant.A * s.z) + plant.c.dot(plant.B) * u_lagged;
    return d;
}

BoundSeries observer_bound_monitor(const SimTrace& trace, const DerivedConstants& constants, double T1, double sup_b) {
    if (trace.rows.empty() || !trace.inputs || !trace.history || !trace.initial_history) {
        throw InvalidArgument("observer_bound_monitor: incomplete trace window");
    }
    if (!(T1 > 0.0) || !(sup_b >= 0.0)) throw InvalidArgument("observer_bound_monitor: bad T1 or sup b");
    const double omega = constants.omega;
    const TraceSups sups = compute_sups(trace);
    const double initial = trace.z0.squaredNorm() + trace.w0 * trace.w0;
    const double denom = 1.0 - std::exp(-2.0 * omega * T1 * std::exp(-sup_b));

    BoundSeries out;
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
        const TraceRow& row = trace.rows[k];
        const double meas = sups.x_lagged[k] + sups.xi[k];
        const double rhs = initial + sups.u_lagged[k] * sups.u_lagged[k] / (2.0 * omega) + meas * meas / denom;
        const double lhs = std::exp(-2.0 * omega * row.t) * (row.z.squaredNorm() + row.w * row.w);
        out.rhs.push_back(rhs);
        out.margins.push_back(rhs - lhs);
    }
    finalize_bound(out);
    return out;
}

}  // namespace predictorlab
