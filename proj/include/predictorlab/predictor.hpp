#pragma once

#include <cstdint>
#include <vector>

#include "predictorlab/plant.hpp"
#include "predictorlab/signals.hpp"

namespace predictorlab {

// Successive-approximation predictor settings: l Picard iterations on each of
// m sub-intervals of length T = (r + tau) / m, iterates stored on nq + 1
// uniform nodes.
struct PredictorConfig {
    int l = 1;
    int m = 2;
    int nq = 256;

    double step(double total_delay) const { return total_delay / m; }
    // rho = (nL + 1) T
    double contraction(const StrictFeedbackPlant& p) const;
    // Throws InvalidArgument on bad integers and ContractionViolated when
    // rho >= 1 (equivalently m <= (nL+1)(r+tau)).
    void validate(const StrictFeedbackPlant& p) const;

    bool operator==(const PredictorConfig&) const = default;
};

// Element of C([0, T]; R^n) sampled on a uniform grid; row k is the value at
// t_k = k T / nq.
struct GridFunction {
    double length;
    Matrix nodes;

    int resolution() const { return static_cast<int>(nodes.rows()) - 1; }
};

// Embeds x0 as the constant function on [0, T].
GridFunction constant_grid(const Vector& x0, double T, int nq);
// Terminal value x(T).
Vector terminal_value(const GridFunction& x);

// (P x)(t) = x(0) + int_0^t (f(x) + A x) + b int_0^t u. The state term uses
// the composite trapezoid rule with compensated summation; the input term is
// integrated exactly.
GridFunction picard_step(const StrictFeedbackPlant& p, const GridFunction& x, const ZohSignal& u_seg, double T);

// Q^l = C_T P^l G_T
Vector q_operator(const StrictFeedbackPlant& p, const Vector& x0, const ZohSignal& u_seg, int l, double T,
                  int nq);

// m-fold composition over the sub-intervals of [0, r + tau), first
// sub-interval applied first. u_hist must cover [0, r + tau).
Vector predict(const StrictFeedbackPlant& p, const PredictorConfig& cfg, const Vector& x0, const ZohSignal& u_hist);

// Approximate predictor: estimates x(t + tau) from z ~ x(t - r) and the open
// input history u on [t - r - tau, t).
Vector phi(const StrictFeedbackPlant& p, const PredictorConfig& cfg, const Vector& z, const ZohSignal& u_open_hist,
           double t_now);

// K rho^{l+1} / (1 - rho) (|x| + sup|u|)
double prop21_bound(const StrictFeedbackPlant& p, const PredictorConfig& cfg, double K, double x_norm, double sup_u);

// RK4 solution of the delay-free system driven by u over [0, horizon],
// steps no longer than h_max and aligned to the input breakpoints.
Vector delay_free_flow(const StrictFeedbackPlant& p, const Vector& x0, const ZohSignal& u, double horizon,
                       double h_max = 1e-4);

// Random draw used by the empirical error studies: |x0| <= 5 and a ZOH input
// on [0, r + tau) with 1..6 segments and |u| <= 5.
struct PredictorDraw {
    Vector x0;
    ZohSignal u;
};
PredictorDraw predictor_draw(const StrictFeedbackPlant& p, std::uint64_t seed, std::uint64_t trial);

struct TrialErrors {
    double scale;                  // |x0| + sup|u|
    std::vector<double> errors;    // |predict - oracle| for l = 1..l_max
};
// Predictor errors of one seeded draw against the RK4 oracle, l = 1..l_max.
TrialErrors predictor_trial(const StrictFeedbackPlant& p, const PredictorConfig& cfg, int l_max, std::uint64_t seed,
                            std::uint64_t trial);

struct KEstimate {
    double k_hat = 0.0;
    std::vector<double> per_l;  // per_l[l-1]
    int draws_used = 0;

    bool operator==(const KEstimate&) const = default;
};

inline constexpr int kKEstimateMaxL = 6;

// K_hat = max over draws and l in 1..6 of
//   |predict - oracle| / (rho^{l+1} / (1 - rho) (|x0| + sup|u|)).
// Trials run in parallel (OpenMP) with per-trial seeding.
KEstimate estimate_K(const StrictFeedbackPlant& p, const PredictorConfig& cfg, int trials, std::uint64_t seed);
// Serial reference of estimate_K; identical results.
KEstimate estimate_K_serial(const StrictFeedbackPlant& p, const PredictorConfig& cfg, int trials,
                            std::uint64_t seed);

// Exact LTI predictor exp(A(r+tau)) z + int_{-r-tau}^0 exp(-As) B u(t+s) ds,
// evaluated segment by segment through the augmented exponential of
// [[A, B], [0, 0]].
Vector lti_predict(const LtiPlant& p, const Vector& z, const ZohSignal& u_open_hist, double t_now);

}  // namespace predictorlab
