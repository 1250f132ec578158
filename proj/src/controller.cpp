#include "predictorlab/controller.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "predictorlab/errors.hpp"

namespace predictorlab {

namespace {

void require_hurwitz(const Matrix& M, const char* what) {
    if (!check_hurwitz(M).is_hurwitz) throw InvalidArgument(what);
}

ConditionEntry strict_entry(std::string id, double lhs, double rhs, std::string note = {}) {
    const double margin = rhs - lhs;
    return {std::move(id), lhs, rhs, margin, margin > kStrictMargin, std::move(note)};
}

// Non-strict inequalities accept a margin within rounding of zero.
ConditionEntry weak_entry(std::string id, double lhs, double rhs, std::string note = {}) {
    const double margin = rhs - lhs;
    return {std::move(id), lhs, rhs, margin, margin >= -kStrictMargin, std::move(note)};
}

Vector ball_point(std::mt19937_64& gen, int n, double radius) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(gen);
    const double nv = v.norm();
    if (nv == 0.0) return Vector::Zero(n);
    return v * (radius * std::pow(unit(gen), 1.0 / n) / nv);
}

}  // namespace

FeedbackGains::FeedbackGains(const StrictFeedbackPlant& plant, Vector k) : k_(std::move(k)) {
    if (k_.size() != plant.dim()) throw InvalidArgument("FeedbackGains: dimension mismatch");
    require_hurwitz(plant.chain_matrix() + plant.input_vector() * k_.transpose(),
                    "FeedbackGains: A + b k' is not Hurwitz");
}

FeedbackGains::FeedbackGains(const LtiPlant& plant, Vector k) : k_(std::move(k)) {
    if (k_.size() != plant.dim()) throw InvalidArgument("FeedbackGains: dimension mismatch");
    require_hurwitz(plant.A + plant.B * k_.transpose(), "FeedbackGains: A + B k' is not Hurwitz");
}

void DesignCertificates::validate() const {
    const auto n = P.rows();
    if (n == 0 || P.cols() != n || Q.rows() != n || Q.cols() != n) {
        throw InvalidArgument("DesignCertificates: P and Q must be square of equal size");
    }
    if (!P.allFinite() || !Q.allFinite()) throw InvalidArgument("DesignCertificates: non-finite matrix");
    for (double v : {mu, gamma, q, a, K1, K2}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("DesignCertificates: constants must be positive");
    }
    if (!(epsilon >= 0.0)) throw InvalidArgument("DesignCertificates: epsilon must be non-negative");
    const double sym = std::max((P - P.transpose()).norm(), (Q - Q.transpose()).norm());
    if (sym > 1e-12 * std::max(1.0, std::max(P.norm(), Q.norm()))) {
        throw InvalidArgument("DesignCertificates: P and Q must be symmetric");
    }
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)); };
    if (!close(a, min_eigenvalue(Q)) || !close(K1, min_eigenvalue(P)) || !close(K2, max_eigenvalue(P))) {
        throw InvalidArgument("DesignCertificates: a, K1, K2 inconsistent with P and Q");
    }
}

DesignCertificates synthesize_certificates(const StrictFeedbackPlant& plant, const FeedbackGains& gains,
                                           const Vector& observer_p, double q_scale, double p_scale) {
    const int n = plant.dim();
    if (gains.k().size() != n || observer_p.size() != n) {
        throw InvalidArgument("synthesize_certificates: dimension mismatch");
    }
    const Matrix A = plant.chain_matrix();
    const Matrix M = A + plant.input_vector() * gains.k().transpose();
    const Matrix N = A + observer_p * plant.output_vector().transpose();

    DesignCertificates c;
    c.P = solve_lyapunov(M, p_scale);
    c.Q = solve_lyapunov(N, q_scale);
    c.q = q_scale;
    c.a = min_eigenvalue(c.Q);
    c.K1 = min_eigenvalue(c.P);
    c.K2 = max_eigenvalue(c.P);

    const double normP = spectral_norm(c.P);
    const double G = plant.gain_bound();
    const double slack = 2.0 * p_scale - 2.0 * plant.lipschitz() * std::sqrt(double(n)) * normP;
    // With G = 0 there is no disturbance term to absorb.
    const double weight = G > 0.0 ? 4.0 * c.K2 + c.K1 : 4.0 * c.K2;
    c.mu = slack > 0.0 ? slack / weight : p_scale / (2.0 * c.K2);
    c.epsilon = G > 0.0 ? c.mu * c.K1 : 0.0;
    c.gamma = G > 0.0 ? G * G * normP * normP / c.epsilon : 1.0;
    return c;
}

bool ConditionReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const ConditionEntry& e) { return e.pass; });
}

const ConditionEntry& ConditionReport::at(const std::string& id) const {
    for (const auto& e : entries) {
        if (e.id == id) return e;
    }
    throw LookupError("ConditionReport: no entry '" + id + "'");
}

void ConditionReport::append(const ConditionReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

double control_update(const FeedbackGains& gains, const StrictFeedbackPlant& plant, const PredictorConfig& cfg,
                      const Vector& z_at_hold, const ZohSignal& u_hist, double t_now) {
    return gains.k().dot(phi(plant, cfg, z_at_hold, u_hist, t_now));
}

double lti_control_update(const FeedbackGains& gains, const LtiPlant& plant, const Vector& z_at_hold,
                          const ZohSignal& u_hist, double t_now) {
    return gains.k().dot(lti_predict(plant, z_at_hold, u_hist, t_now));
}

ConditionReport check_nonlinear_lyapunov(const StrictFeedbackPlant& plant, const FeedbackGains& gains,
                                         const DesignCertificates& cert, const LyapunovGrid& grid) {
    cert.validate();
    const int n = plant.dim();
    if (cert.P.rows() != n) throw InvalidArgument("check_nonlinear_lyapunov: certificate dimension mismatch");
    if (grid.points < 1 || !(grid.radius > 0.0)) throw InvalidArgument("check_nonlinear_lyapunov: bad grid");

    const Matrix M = plant.chain_matrix() + plant.input_vector() * gains.k().transpose();
    const Matrix& P = cert.P;
    const double normP = spectral_norm(P);
    const double G = plant.gain_bound();

    ConditionReport rep;
    const Matrix S = P * M + M.transpose() * P +
                     (2.0 * plant.lipschitz() * std::sqrt(double(n)) * normP + cert.epsilon) *
                         Matrix::Identity(n, n);
    rep.entries.push_back(weak_entry("lyapunov-sufficient", max_eigenvalue(0.5 * (S + S.transpose())),
                                     -4.0 * cert.mu * cert.K2, "tier i"));
    // Disturbance absorption needs epsilon > 0 unless G = 0.
    const double gamma_needed = G > 0.0 ? (cert.epsilon > 0.0 ? G * G * normP * normP / cert.epsilon : kInf) : 0.0;
    rep.entries.push_back(weak_entry("lyapunov-gamma", gamma_needed, cert.gamma, "tier i"));

    std::mt19937_64 gen(grid.seed);
    std::uniform_real_distribution<double> u_dist(-grid.radius, grid.radius);
    double worst = kInf, worst_lhs = 0.0, worst_rhs = 0.0;
    for (int k = 0; k < grid.points; ++k) {
        const Vector x = k == 0 ? Vector::Zero(n) : ball_point(gen, n, grid.radius);
        const Vector d = ball_point(gen, n, grid.radius);
        const double u = u_dist(gen);
        const Vector Px = P * x;
        const double lhs = Px.dot(M * x) + Px.dot(plant.f(x)) + Px.dot(plant.g(x, u).cwiseProduct(d));
        const double rhs = -2.0 * cert.mu * x.dot(Px) + cert.gamma * d.squaredNorm();
        if (rhs - lhs < worst) {
            worst = rhs - lhs;
            worst_lhs = lhs;
            worst_rhs = rhs;
        }
    }
    rep.entries.push_back(weak_entry("lyapunov-sampled", worst_lhs, worst_rhs, "tier ii, worst grid point"));
    return rep;
}

ConditionReport check_design_conditions(const StrictFeedbackPlant& plant, const FeedbackGains& gains,
                                        const Vector& observer_p, const DesignCertificates& cert, double theta,
                                        double T1, double T2, const PredictorConfig& cfg, double k_hat) {
    cert.validate();
    const int n = plant.dim();
    if (cert.P.rows() != n || observer_p.size() != n || gains.k().size() != n) {
        throw InvalidArgument("check_design_conditions: dimension mismatch");
    }
    if (!(T1 > 0.0) || !(T2 > 0.0) || !(theta > 0.0) || !(k_hat >= 0.0)) {
        throw InvalidArgument("check_design_conditions: T1, T2, theta must be positive and K non-negative");
    }
    const double rho = cfg.contraction(plant);
    if (!(rho < 1.0)) throw ContractionViolated("check_design_conditions: (nL+1)T >= 1");

    const double L = plant.lipschitz();
    const double sqrt_n = std::sqrt(double(n));
    const double normQ = spectral_norm(cert.Q);
    const double Qp = (cert.Q * observer_p).norm();
    const double k_norm = gains.k().norm();
    const double bPb = cert.P(n - 1, n - 1);
    const double theta_min = std::max(1.0, 2.0 * normQ * L * sqrt_n / cert.q);
    const double diameter = 4.0 * Qp * std::sqrt(normQ / cert.a);
    const double hold_gain = ((n * L + 1.0 + k_norm) * std::sqrt(bPb / (2.0 * cert.K1)) + cert.mu) * k_norm;
    const double pred_err = k_hat * std::pow(rho, cfg.l + 1) / (1.0 - rho);

    ConditionReport rep;
    rep.entries.push_back(strict_entry("sampling-diameter", diameter * (L + theta_min) * T1, cert.q));
    rep.entries.push_back(strict_entry("holding-period", hold_gain * T2, cert.mu));
    rep.entries.push_back(strict_entry("observer-sampling", diameter * (L + theta) * T1, cert.q));
    rep.entries.push_back(weak_entry("observer-gain", theta_min, theta));
    rep.entries.push_back(strict_entry("predictor-accuracy", hold_gain * (T2 + pred_err), cert.mu, "empirical-K"));
    return rep;
}

}  // namespace predictorlab
