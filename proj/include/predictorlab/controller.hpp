#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "predictorlab/linalg.hpp"
#include "predictorlab/plant.hpp"
#include "predictorlab/predictor.hpp"

namespace predictorlab {

// Nominal feedback u = k'x; construction checks A + b k' Hurwitz.
class FeedbackGains {
public:
    FeedbackGains(const StrictFeedbackPlant& plant, Vector k);
    FeedbackGains(const LtiPlant& plant, Vector k);

    const Vector& k() const { return k_; }

private:
    Vector k_;
};

// Certificates for the delay-free feedback (P, mu, gamma) and for the
// observer error dynamics (Q, q), with the eigenvalue bounds
// a |x|^2 <= x'Qx and K1 |x|^2 <= x'Px <= K2 |x|^2.
struct DesignCertificates {
    Matrix P;
    double mu = 0.0;
    double gamma = 0.0;
    Matrix Q;
    double q = 0.0;
    double a = 0.0;
    double K1 = 0.0;
    double K2 = 0.0;
    // Weight of the disturbance cross term in the sufficient Lyapunov check.
    double epsilon = 0.0;

    // Throws InvalidArgument when a field is missing or inconsistent.
    void validate() const;
};

// P and Q from Lyapunov equalities on A + b k' and A + p c'; mu from the
// sufficient Lyapunov condition when it admits a positive rate, otherwise the
// linear-part rate p_scale / (2 K2); epsilon = mu K1 and
// gamma = G^2 |P|^2 / epsilon.
DesignCertificates synthesize_certificates(const StrictFeedbackPlant& plant, const FeedbackGains& gains,
                                           const Vector& observer_p, double q_scale = 1.0, double p_scale = 1.0);

struct ConditionEntry {
    std::string id;
    double lhs;
    double rhs;
    double margin;  // rhs - lhs
    bool pass;
    std::string note;
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;

    bool all_pass() const;
    const ConditionEntry& at(const std::string& id) const;
    void append(const ConditionReport& other);
};

inline constexpr double kStrictMargin = 1e-12;

// u = k' Phi_{l,m}(z(t), u on [t - r - tau, t)).
double control_update(const FeedbackGains& gains, const StrictFeedbackPlant& plant, const PredictorConfig& cfg,
                      const Vector& z_at_hold, const ZohSignal& u_hist, double t_now);

double lti_control_update(const FeedbackGains& gains, const LtiPlant& plant, const Vector& z_at_hold,
                          const ZohSignal& u_hist, double t_now);

struct LyapunovGrid {
    int points = 2000;
    double radius = 10.0;
    std::uint64_t seed = 3;
};

// Two-tier check of
//   x'P(A+bk')x + x'Pf(x) + x'P diag(g) d <= -2 mu x'Px + gamma |d|^2:
// "lyapunov-sufficient" and "lyapunov-gamma" bound the nonlinear and
// disturbance terms by L sqrt(n) |P| and epsilon; "lyapunov-sampled" reports
// the worst margin on a seeded grid of (x, d, u).
ConditionReport check_nonlinear_lyapunov(const StrictFeedbackPlant& plant, const FeedbackGains& gains,
                                         const DesignCertificates& cert, const LyapunovGrid& grid = {});

// Sampling, holding and predictor-accuracy conditions:
//   "sampling-diameter"   4|Qp|(L + max{1, 2|Q|L sqrt(n)/q}) T1 sqrt(|Q|/a) < q
//   "holding-period"      ((nL+1+|k|) sqrt(b'Pb/(2K1)) + mu) |k| T2 < mu
//   "observer-sampling"   4|Qp|(L + theta) T1 sqrt(|Q|/a) < q
//   "observer-gain"       theta >= max{1, 2|Q|L sqrt(n)/q}
//   "predictor-accuracy"  ((nL+1+|k|) sqrt(b'Pb/(2K1)) + mu) |k| (T2 + K rho^{l+1}/(1-rho)) < mu
// The last uses the empirical K.
ConditionReport check_design_conditions(const StrictFeedbackPlant& plant, const FeedbackGains& gains,
                                        const Vector& observer_p, const DesignCertificates& cert, double theta,
                                        double T1, double T2, const PredictorConfig& cfg, double k_hat);

}  // namespace predictorlab
