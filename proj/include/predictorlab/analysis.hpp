#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "predictorlab/controller.hpp"
#include "predictorlab/simulator.hpp"

namespace predictorlab {

enum class SweepAxis { T1, T2, Theta, L, M, DAmplitude };

// "T1", "T2", "theta", "l", "m", "d_amplitude"
std::string axis_name(SweepAxis a);
SweepAxis parse_axis(const std::string& name);

struct SweepAxisValues {
    SweepAxis axis;
    std::vector<double> values;
};

// Auto picks DecayFit when d = 0 and SupBound otherwise.
enum class SuccessCriterion { Auto, DecayFit, SupBound };

struct SweepSpec {
    SimConfig base;
    std::vector<SweepAxisValues> axes;
    SuccessCriterion criterion = SuccessCriterion::Auto;
    // K for the predictor-accuracy condition; unset means 2 * estimate_K per m.
    std::optional<double> k_hat;
    int k_trials = 20;

    void validate() const;
};

struct SweepPoint {
    std::vector<double> values;  // one per axis, in axis order
    bool success = false;
    bool diverged = false;
    double decay_rate = kNaN;
    double r_squared = kNaN;
    double sup_x = kNaN;  // sup |x| over the judged window
    ConditionReport conditions;
};

struct SweepResult {
    std::vector<SweepAxis> axes;
    std::vector<SweepPoint> points;  // row-major, last axis fastest

    bool operator==(const SweepResult& o) const;
};

// Config of one grid point. h is reduced to min(T1, T2)/4 when a period axis
// shrinks below the base step.
SimConfig apply_point(const SimConfig& base, const std::vector<SweepAxisValues>& axes,
                      const std::vector<double>& values);

// Success test: decay fit over the last 60% of the horizon with rate > 0 and
// r^2 >= 0.9, or sup |x| over the last 30% <= 10 x the d amplitude.
bool judge_success(const SimTrace& trace, const SimConfig& cfg, SuccessCriterion criterion, SweepPoint& out);

// Grid points run in parallel (OpenMP), capped by PREDICTORLAB_THREADS.
SweepResult run_sweep(const SweepSpec& spec);
// Serial reference of run_sweep; identical results.
SweepResult run_sweep_serial(const SweepSpec& spec);

// Thread cap for parallel kernels: PREDICTORLAB_THREADS when set to a
// positive integer, otherwise the OpenMP default.
int worker_threads();

struct ConvergenceCurve {
    std::vector<int> l;
    std::vector<double> max_error;
    double fitted_ratio;  // exp of the least-squares slope of log(max_error) vs l
    double rho;
};

// Max predictor error against the RK4 oracle over seeded draws for each l in
// [l_min, l_max]. Throws ContractionViolated when rho >= 1.
ConvergenceCurve predictor_convergence_study(const StrictFeedbackPlant& plant, int m, int l_min, int l_max,
                                             int trials, std::uint64_t seed, int nq = 4096);

}  // namespace predictorlab
