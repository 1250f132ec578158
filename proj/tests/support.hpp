#pragma once

#include <cmath>
#include <random>

#include "predictorlab/analysis.hpp"
#include "predictorlab/plant.hpp"
#include "predictorlab/predictor.hpp"
#include "predictorlab/simulator.hpp"

namespace testsupport {

using namespace predictorlab;

inline StrictFeedbackPlant example4() { return std::get<StrictFeedbackPlant>(catalog_get("example4")); }
inline StrictFeedbackPlant linear2() { return std::get<StrictFeedbackPlant>(catalog_get("linear2")); }
inline StrictFeedbackPlant integrator2() { return std::get<StrictFeedbackPlant>(catalog_get("integrator2")); }
inline LtiPlant lti() { return std::get<LtiPlant>(catalog_get("lti")); }

inline double drift(double x) { return x == 0.0 ? 0.0 : std::copysign(x * x, x) / std::sqrt(1.0 + x * x); }

// Hand-expanded l = 1, m = 2 predictor for the worked example: stage one
// moves x1 along the drift and x2 along the first-half input integral,
// stage two repeats with the second half.
inline Vector two_stage_closed_form(const Vector& z, double int_first, double int_second) {
    const double T = 0.25;
    const double X1 = z(0) + T * (z(1) + drift(z(0)));
    const double X2 = z(1) + int_first;
    return Vector{{X1 + T * (X2 + drift(X1)), X2 + int_second}};
}

// The nominal worked-example scenario.
inline SimConfig nominal() {
    SimConfig c;
    c.plant = "example4";
    c.k = Vector{{-15.0, -8.0}};
    c.p = Vector{{-3.0, -3.0}};
    c.theta = 1.0;
    c.predictor = PredictorConfig{1, 2, 256};
    c.T1 = 0.03;
    c.T2 = 0.01;
    c.t_end = 40.0;
    c.h = 1e-3;
    c.x0 = Vector{{1.0, 1.0}};
    c.u0 = {{-0.5, -2.0}};
    c.z0 = Vector::Zero(2);
    c.w0 = 0.0;
    c.k_hat = 0.0734;
    return c;
}

inline SimConfig forced(double amplitude = 0.5) {
    SimConfig c = nominal();
    c.t_end = 60.0;
    c.d = {ExogenousSignal::Sinusoid{amplitude, 1.0, 0.0}, ExogenousSignal{}};
    return c;
}

inline SimConfig lti_scenario() {
    SimConfig c;
    c.plant = "lti";
    c.mode = PredictorMode::ExactLti;
    c.k = Vector{{-3.0, -3.0}};
    c.p = Vector{{-3.0, -3.0}};
    c.T1 = 0.03;
    c.T2 = 0.01;
    c.t_end = 20.0;
    c.h = 1e-3;
    c.x0 = Vector{{1.0, -0.5}};
    c.u0 = {{-0.5, 0.5}};
    c.z0 = Vector::Zero(2);
    c.monitors = false;
    return c;
}

inline double max_abs_component(const SimTrace& tr, int i, double t0, double t1) {
    double m = 0.0;
    for (const auto& row : tr.rows) {
        if (row.t >= t0 && row.t <= t1) m = std::max(m, std::abs(row.x(i)));
    }
    return m;
}

}  // namespace testsupport
