#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "predictorlab/controller.hpp"
#include "predictorlab/observer.hpp"
#include "predictorlab/plant.hpp"
#include "predictorlab/predictor.hpp"
#include "predictorlab/trace.hpp"

namespace predictorlab {

enum class PredictorMode { Approximate, ExactLti };

// Everything needed for one closed-loop run. Initial data: x constant equal
// to x0 on [-r, 0], u given by u0 segments on [-r - tau, 0), observer (z0, w0).
struct SimConfig {
    std::string plant = "example4";
    Vector k;
    Vector p;
    double theta = 1.0;
    PredictorMode mode = PredictorMode::Approximate;
    PredictorConfig predictor;
    double T1 = 0.03;
    double T2 = 0.01;
    double t_end = 40.0;
    double h = 1e-3;
    Vector x0;
    std::vector<ZohSegment> u0;
    Vector z0;
    double w0 = 0.0;
    // One signal per state component; empty means d = 0.
    std::vector<ExogenousSignal> d;
    ExogenousSignal xi;
    ExogenousSignal b;
    bool monitors = true;
    // K used by the predictor growth constant in the monitors.
    double k_hat = 0.0;
    // Added to the seed of every noise signal.
    std::uint64_t seed = 0;

    // Throws InvalidArgument on shape, sign or step-size violations, and
    // LookupError for an unknown plant.
    void validate() const;
    bool operator==(const SimConfig&) const;
};

// Time-ordered merge of the two clocks: samples tau_{i+1} = tau_i + T1 exp(-b(tau_i))
// and holds j T2. Coincident times (within 1e-9) are one step with the sample
// processed first.
class HybridEventQueue {
public:
    HybridEventQueue(double T1, double T2, ExogenousSignal b);

    struct Event {
        double t;
        bool sample;
        bool hold;
        double b;  // b at this sample, which sets the gap to the next one
    };

    double peek() const;
    Event pop();

private:
    double T1_;
    double T2_;
    ExogenousSignal b_;
    double last_sample_ = 0.0;
    double next_sample_;
    double last_b_;
    long next_hold_ = 0;
};

inline constexpr double kEventMerge = 1e-9;
inline constexpr double kDivergenceLimit = 1e12;

// Integrates the closed loop. Throws DivergenceError when the state leaves
// the 1e12 ball or turns non-finite.
SimTrace run_closed_loop(const SimConfig& cfg);
// Same, but a divergent run returns its partial trace with diverged_at set.
SimTrace run_closed_loop_partial(const SimConfig& cfg);

// y = x_1(t_sample - r) + xi
double measure(const StateHistory& initial, const StateHistory& history, double t_sample, double r, double xi);

struct MonitorReport {
    double m24 = kNaN;
    double m214 = kNaN;
    double m223 = kNaN;
    double m224 = kNaN;
    // Minimum relative margins, one per bound.
    double rel24 = kNaN;
    double rel214 = kNaN;
    double rel223 = kNaN;
    double rel224 = kNaN;
};

// Evaluates the forward-completeness, predictor-growth, observer and
// closed-loop growth bounds at every row, writes the margins into the rows
// and returns the minima. Requires a strict-feedback plant.
MonitorReport run_monitors(SimTrace& trace, const SimConfig& cfg);

struct DecayFit {
    double rate;       // negated slope of log(|x| + |z - x(t - r)|)
    double r_squared;
};

DecayFit decay_fit(const SimTrace& trace, double t_start, double t_end);

// |x(t)| + |z(t) - x(t - r)| at row k.
double closed_loop_error(const SimTrace& trace, std::size_t k);

}  // namespace predictorlab
