#include "predictorlab/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "predictorlab/errors.hpp"
#include "predictorlab/integrator.hpp"
#include "predictorlab/linalg.hpp"

namespace predictorlab {

double PredictorConfig::contraction(const StrictFeedbackPlant& p) const {
    return (p.dim() * p.lipschitz() + 1.0) * step(p.total_delay());
}

void PredictorConfig::validate(const StrictFeedbackPlant& p) const {
    if (l < 1 || m < 1) throw InvalidArgument("predictor: l and m must be positive");
    if (nq < 2 || nq % 2 != 0) throw InvalidArgument("predictor: nq must be even and >= 2");
    if (!(contraction(p) < 1.0)) {
        throw ContractionViolated("predictor: (nL+1)T >= 1; increase m above (nL+1)(r+tau)");
    }
}

GridFunction constant_grid(const Vector& x0, double T, int nq) {
    if (nq < 2 || nq % 2 != 0) throw InvalidArgument("constant_grid: nq must be even and >= 2");
    if (!(T > 0.0)) throw InvalidArgument("constant_grid: T must be positive");
    return {T, x0.transpose().replicate(nq + 1, 1)};
}

Vector terminal_value(const GridFunction& x) { return x.nodes.row(x.nodes.rows() - 1).transpose(); }

GridFunction picard_step(const StrictFeedbackPlant& p, const GridFunction& x, const ZohSignal& u_seg, double T) {
    const int n = p.dim();
    const int nq = x.resolution();
    if (x.nodes.cols() != n || nq < 2) throw InvalidArgument("picard_step: grid shape mismatch");
    if (!(T > 0.0) || x.length != T) throw InvalidArgument("picard_step: grid length differs from T");
    if (u_seg.domain_start() > 0.0 || u_seg.domain_end() < T) {
        throw InvalidArgument("picard_step: input does not cover [0, T)");
    }

    const double h = T / nq;
    Matrix integrand(nq + 1, n);
    for (int k = 0; k <= nq; ++k) {
        const Vector xk = x.nodes.row(k).transpose();
        Vector fk = p.f(xk);
        fk.head(n - 1) += xk.tail(n - 1);
        integrand.row(k) = fk.transpose();
    }

    GridFunction out{T, Matrix(nq + 1, n)};
    const Vector x0 = x.nodes.row(0).transpose();
    out.nodes.row(0) = x0.transpose();
    // Neumaier-compensated running trapezoid sum per component.
    Vector sum = Vector::Zero(n);
    Vector comp = Vector::Zero(n);
    for (int k = 1; k <= nq; ++k) {
        const double tk = (k == nq) ? T : k * h;
        for (int i = 0; i < n; ++i) {
            const double term = h * (integrand(k - 1, i) + integrand(k, i)) / 2.0;
            const double s = sum(i) + term;
            comp(i) += std::abs(sum(i)) >= std::abs(term) ? (sum(i) - s) + term : (term - s) + sum(i);
            sum(i) = s;
        }
        Vector node = x0 + (sum + comp);
        node(n - 1) += u_seg.integral(0.0, tk);
        out.nodes.row(k) = node.transpose();
    }
    return out;
}

Vector q_operator(const StrictFeedbackPlant& p, const Vector& x0, const ZohSignal& u_seg, int l, double T, int nq) {
    if (l < 1) throw InvalidArgument("q_operator: l must be positive");
    if (x0.size() != p.dim()) throw InvalidArgument("q_operator: dimension mismatch");
    GridFunction x = constant_grid(x0, T, nq);
    for (int j = 0; j < l; ++j) x = picard_step(p, x, u_seg, T);
    return terminal_value(x);
}

namespace {

// u restricted to [a, b) and re-based to [0, T).
ZohSignal sub_interval(const ZohSignal& u, double a, double b, double T) {
    const ZohSignal w = u.window(a, b);
    std::vector<ZohSegment> segs;
    for (const auto& s : w.segments()) {
        if (s.start < T) segs.push_back(s);
    }
    return ZohSignal(std::move(segs), T);
}

}  // namespace

Vector predict(const StrictFeedbackPlant& p, const PredictorConfig& cfg, const Vector& x0, const ZohSignal& u_hist) {
    cfg.validate(p);
    if (x0.size() != p.dim()) throw InvalidArgument("predict: dimension mismatch");
    const double horizon = p.total_delay();
    if (u_hist.domain_start() > 0.0 || u_hist.domain_end() < horizon) {
        throw InvalidArgument("predict: input history does not cover [0, r + tau)");
    }
    const double T = cfg.step(horizon);
    Vector x = x0;
    for (int i = 0; i < cfg.m; ++i) {
        const double a = horizon * i / cfg.m;
        const double b = (i + 1 == cfg.m) ? horizon : horizon * (i + 1) / cfg.m;
        x = q_operator(p, x, sub_interval(u_hist, a, b, T), cfg.l, T, cfg.nq);
    }
    return x;
}

Vector phi(const StrictFeedbackPlant& p, const PredictorConfig& cfg, const Vector& z, const ZohSignal& u_open_hist,
           double t_now) {
    return predict(p, cfg, z, shift_history(u_open_hist, t_now, p.total_delay()));
}

double prop21_bound(const StrictFeedbackPlant& p, const PredictorConfig& cfg, double K, double x_norm, double sup_u) {
    const double rho = cfg.contraction(p);
    if (!(rho < 1.0)) throw ContractionViolated("prop21_bound: (nL+1)T >= 1");
    if (!(K >= 0.0)) throw InvalidArgument("prop21_bound: K must be non-negative");
    return K * std::pow(rho, cfg.l + 1) / (1.0 - rho) * (x_norm + sup_u);
}

Vector delay_free_flow(const StrictFeedbackPlant& p, const Vector& x0, const ZohSignal& u, double horizon,
                       double h_max) {
    std::vector<double> breakpoints;
    for (const auto& s : u.segments()) breakpoints.push_back(s.start);
    auto rhs = [&](double, const Vector& x, double t_hold) { return delay_free_rhs(p, x, u.eval(t_hold)); };
    return rk4_integrate(rhs, 0.0, x0, horizon, h_max, breakpoints);
}

PredictorDraw predictor_draw(const StrictFeedbackPlant& p, std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    std::mt19937_64 gen(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> pieces(1, 6);

    const int n = p.dim();
    Vector dir(n);
    for (int i = 0; i < n; ++i) dir(i) = normal(gen);
    const double radius = 5.0 * unit(gen);
    Vector x0 = dir.norm() > 0.0 ? Vector(dir * (radius / dir.norm())) : Vector::Zero(n);

    const double horizon = p.total_delay();
    const int count = pieces(gen);
    std::vector<double> starts{0.0};
    for (int j = 1; j < count; ++j) starts.push_back(horizon * unit(gen));
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    std::vector<ZohSegment> segs;
    for (double s : starts) segs.push_back({s, -5.0 + 10.0 * unit(gen)});
    return {std::move(x0), ZohSignal(std::move(segs), horizon)};
}

TrialErrors predictor_trial(const StrictFeedbackPlant& p, const PredictorConfig& cfg, int l_max, std::uint64_t seed,
                            std::uint64_t trial) {
    const PredictorDraw draw = predictor_draw(p, seed, trial);
    const Vector oracle = delay_free_flow(p, draw.x0, draw.u, p.total_delay());
    TrialErrors out{draw.x0.norm() + draw.u.sup_abs(), {}};
    PredictorConfig c = cfg;
    for (int l = 1; l <= l_max; ++l) {
        c.l = l;
        out.errors.push_back((predict(p, c, draw.x0, draw.u) - oracle).norm());
    }
    return out;
}

namespace {

// Per-l ratios of one draw; empty when the draw is degenerate.
std::vector<double> k_ratios(const StrictFeedbackPlant& p, const PredictorConfig& cfg, double rho, std::uint64_t seed,
                             std::uint64_t trial) {
    const TrialErrors te = predictor_trial(p, cfg, kKEstimateMaxL, seed, trial);
    if (!(te.scale > 0.0)) return {};
    std::vector<double> ratios;
    for (int l = 1; l <= kKEstimateMaxL; ++l) {
        ratios.push_back(te.errors[l - 1] / (std::pow(rho, l + 1) / (1.0 - rho) * te.scale));
    }
    return ratios;
}

KEstimate reduce_ratios(const std::vector<std::vector<double>>& per_trial) {
    KEstimate est;
    est.per_l.assign(kKEstimateMaxL, 0.0);
    for (const auto& ratios : per_trial) {
        if (ratios.empty()) continue;
        ++est.draws_used;
        for (int l = 0; l < kKEstimateMaxL; ++l) est.per_l[l] = std::max(est.per_l[l], ratios[l]);
    }
    est.k_hat = *std::max_element(est.per_l.begin(), est.per_l.end());
    return est;
}

void check_estimate_args(const StrictFeedbackPlant& p, const PredictorConfig& cfg, int trials) {
    if (trials < 1) throw InvalidArgument("estimate_K: trials must be >= 1");
    cfg.validate(p);
}

}  // namespace

KEstimate estimate_K(const StrictFeedbackPlant& p, const PredictorConfig& cfg, int trials, std::uint64_t seed) {
    check_estimate_args(p, cfg, trials);
    const double rho = cfg.contraction(p);
    std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < trials; ++k) {
        per_trial[static_cast<std::size_t>(k)] = k_ratios(p, cfg, rho, seed, static_cast<std::uint64_t>(k));
    }
    return reduce_ratios(per_trial);
}

KEstimate estimate_K_serial(const StrictFeedbackPlant& p, const PredictorConfig& cfg, int trials,
                            std::uint64_t seed) {
    check_estimate_args(p, cfg, trials);
    const double rho = cfg.contraction(p);
    std::vector<std::vector<double>> per_trial;
    for (int k = 0; k < trials; ++k) per_trial.push_back(k_ratios(p, cfg, rho, seed, static_cast<std::uint64_t>(k)));
    return reduce_ratios(per_trial);
}

Vector lti_predict(const LtiPlant& p, const Vector& z, const ZohSignal& u_open_hist, double t_now) {
    p.validate();
    const int n = p.dim();
    if (z.size() != n) throw InvalidArgument("lti_predict: dimension mismatch");
    const ZohSignal u = shift_history(u_open_hist, t_now, p.total_delay());

    Matrix aug = Matrix::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = p.A;
    aug.topRightCorner(n, 1) = p.B;

    Vector x = z;
    const auto segs = u.segments();
    for (std::size_t j = 0; j < segs.size(); ++j) {
        const double end = j + 1 < segs.size() ? segs[j + 1].start : u.domain_end();
        const double dt = end - segs[j].start;
        if (!(dt > 0.0)) continue;
        const Matrix E = expm(aug * dt);
        x = E.topLeftCorner(n, n) * x + E.topRightCorner(n, 1) * segs[j].value;
    }
    return x;
}

}  // namespace predictorlab
