#pragma once

#include "predictorlab/plant.hpp"
#include "predictorlab/trace.hpp"

namespace predictorlab {

// Injection gains p and high-gain parameter theta. Construction checks that
// A + p c' is Hurwitz and theta >= 1.
class ObserverGains {
public:
    ObserverGains(const StrictFeedbackPlant& plant, Vector p, double theta);
    ObserverGains(const LtiPlant& plant, Vector p);

    const Vector& p() const { return p_; }
    double theta() const { return theta_; }
    // theta^i p_i
    const Vector& scaled() const { return scaled_; }

private:
    Vector p_;
    double theta_;
    Vector scaled_;
};

// (z, w): z estimates x(t - r), w predicts the output x_1(t - r) between
// samples.
struct ObserverState {
    Vector z;
    double w;
};

struct ObserverDerivative {
    Vector dz;
    double dw;
};

// Flow of the high-gain sampled-data observer between samples. u_lagged is
// u(t - r - tau).
ObserverDerivative observer_rhs(const StrictFeedbackPlant& plant, const ObserverGains& gains, const ObserverState& s,
                                double u_lagged);

// Measurement update at a sampling time: w <- y, z unchanged.
ObserverState observer_jump(const ObserverState& s, double y);

ObserverDerivative lti_observer_rhs(const LtiPlant& plant, const Vector& gains_p, const ObserverState& s,
                                    double u_lagged);

// Margin of the observer growth bound
//   exp(-2 w t)(|z|^2 + w^2) <= |z0|^2 + w0^2 + sup|u(s-r-tau)|^2 / (2 w)
//        + (sup|x(s-r)| + sup|xi|)^2 / (1 - exp(-2 w T1 exp(-sup b)))
// at every trace row.
BoundSeries observer_bound_monitor(const SimTrace& trace, const DerivedConstants& constants, double T1, double sup_b);

}  // namespace predictorlab
