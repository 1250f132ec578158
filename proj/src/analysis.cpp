#include "predictorlab/analysis.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "predictorlab/errors.hpp"

namespace predictorlab {

std::string axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::T1: return "T1";
        case SweepAxis::T2: return "T2";
        case SweepAxis::Theta: return "theta";
        case SweepAxis::L: return "l";
        case SweepAxis::M: return "m";
        case SweepAxis::DAmplitude: return "d_amplitude";
    }
    throw InvalidArgument("axis_name: bad axis");
}

SweepAxis parse_axis(const std::string& name) {
    for (SweepAxis a : {SweepAxis::T1, SweepAxis::T2, SweepAxis::Theta, SweepAxis::L, SweepAxis::M,
                        SweepAxis::DAmplitude}) {
        if (axis_name(a) == name) return a;
    }
    throw InvalidArgument("unknown sweep axis '" + name + "'");
}

bool SweepResult::operator==(const SweepResult& o) const {
    if (axes != o.axes || points.size() != o.points.size()) return false;
    auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& a = points[i];
        const auto& b = o.points[i];
        if (a.values != b.values || a.success != b.success || a.diverged != b.diverged ||
            !same(a.decay_rate, b.decay_rate) || !same(a.r_squared, b.r_squared) || !same(a.sup_x, b.sup_x) ||
            a.conditions.entries.size() != b.conditions.entries.size()) {
            return false;
        }
        for (std::size_t j = 0; j < a.conditions.entries.size(); ++j) {
            if (!same(a.conditions.entries[j].margin, b.conditions.entries[j].margin)) return false;
        }
    }
    return true;
}

namespace {

int as_int(double v, const char* what) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 1.0) throw InvalidArgument(std::string("sweep: ") + what + " must be a positive integer");
    return static_cast<int>(r);
}

std::vector<std::vector<double>> grid_points(const std::vector<SweepAxisValues>& axes) {
    std::vector<std::vector<double>> pts{{}};
    for (const auto& ax : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& p : pts) {
            for (double v : ax.values) {
                auto q = p;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        }
        pts = std::move(next);
    }
    return pts;
}

double d_amplitude(const SimConfig& cfg) {
    double a = 0.0;
    for (const auto& s : cfg.d) a = std::max(a, s.sup_abs());
    return a;
}

// Everything shared across grid points, computed once up front.
struct SweepContext {
    std::vector<std::vector<double>> grid;
    std::vector<SimConfig> configs;
    std::optional<StrictFeedbackPlant> plant;
    std::optional<DesignCertificates> cert;
    std::map<int, double> k_by_m;
};

SweepContext prepare(const SweepSpec& spec) {
    spec.validate();
    SweepContext ctx;
    ctx.grid = grid_points(spec.axes);
    for (const auto& v : ctx.grid) {
        ctx.configs.push_back(apply_point(spec.base, spec.axes, v));
        ctx.configs.back().validate();
    }
    const AnyPlant any = catalog_get(spec.base.plant);
    if (const auto* sp = std::get_if<StrictFeedbackPlant>(&any)) {
        ctx.plant.emplace(*sp);
        try {
            ctx.cert = synthesize_certificates(*sp, FeedbackGains(*sp, spec.base.k), spec.base.p);
        } catch (const NoSolution&) {
            ctx.cert.reset();
        }
        for (const auto& c : ctx.configs) {
            const int m = c.predictor.m;
            if (ctx.k_by_m.count(m)) continue;
            ctx.k_by_m[m] = spec.k_hat ? *spec.k_hat
                                       : 2.0 * estimate_K(*sp, c.predictor, spec.k_trials, spec.base.seed).k_hat;
        }
    }
    return ctx;
}

SweepPoint run_point(const SweepSpec& spec, const SweepContext& ctx, std::size_t i) {
    const SimConfig& cfg = ctx.configs[i];
    SweepPoint pt;
    pt.values = ctx.grid[i];
    if (ctx.plant && ctx.cert) {
        pt.conditions = check_design_conditions(*ctx.plant, FeedbackGains(*ctx.plant, cfg.k), cfg.p, *ctx.cert,
                                                cfg.theta, cfg.T1, cfg.T2, cfg.predictor,
                                                ctx.k_by_m.at(cfg.predictor.m));
    }
    SimConfig run_cfg = cfg;
    run_cfg.monitors = false;
    const SimTrace tr = run_closed_loop_partial(run_cfg);
    if (tr.diverged_at) {
        pt.diverged = true;
        return pt;
    }
    judge_success(tr, cfg, spec.criterion, pt);
    return pt;
}

}  // namespace

void SweepSpec::validate() const {
    if (axes.empty()) throw InvalidArgument("SweepSpec: at least one axis required");
    for (const auto& ax : axes) {
        if (ax.values.empty()) throw InvalidArgument("SweepSpec: axis '" + axis_name(ax.axis) + "' has no values");
        for (double v : ax.values) {
            if (!std::isfinite(v)) throw InvalidArgument("SweepSpec: non-finite axis value");
        }
    }
    if (k_hat && !(*k_hat >= 0.0)) throw InvalidArgument("SweepSpec: k_hat must be non-negative");
    if (k_trials < 1) throw InvalidArgument("SweepSpec: k_trials must be >= 1");
}

SimConfig apply_point(const SimConfig& base, const std::vector<SweepAxisValues>& axes,
                      const std::vector<double>& values) {
    if (values.size() != axes.size()) throw InvalidArgument("apply_point: one value per axis required");
    SimConfig c = base;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const double v = values[i];
        switch (axes[i].axis) {
            case SweepAxis::T1: c.T1 = v; break;
            case SweepAxis::T2: c.T2 = v; break;
            case SweepAxis::Theta: c.theta = v; break;
            case SweepAxis::L: c.predictor.l = as_int(v, "l"); break;
            case SweepAxis::M: c.predictor.m = as_int(v, "m"); break;
            case SweepAxis::DAmplitude: {
                if (!(v >= 0.0)) throw InvalidArgument("apply_point: d amplitude must be non-negative");
                const int dim = static_cast<int>(std::max<std::size_t>(c.d.size(), c.x0.size()));
                double freq = 1.0;
                if (!c.d.empty()) {
                    if (auto s = std::get_if<ExogenousSignal::Sinusoid>(&c.d.front().kind())) freq = s->frequency;
                }
                c.d.assign(dim, ExogenousSignal{});
                c.d.front() = ExogenousSignal::Sinusoid{v, freq, 0.0};
                break;
            }
        }
    }
    c.h = std::min(c.h, std::min(c.T1, c.T2) / 4.0);
    return c;
}

bool judge_success(const SimTrace& trace, const SimConfig& cfg, SuccessCriterion criterion, SweepPoint& out) {
    const double amp = d_amplitude(cfg);
    if (criterion == SuccessCriterion::Auto) {
        criterion = amp == 0.0 ? SuccessCriterion::DecayFit : SuccessCriterion::SupBound;
    }
    const double t_end = trace.rows.back().t;
    if (criterion == SuccessCriterion::DecayFit) {
        const double t0 = 0.4 * t_end;
        double sup = 0.0;
        for (const auto& row : trace.rows) {
            if (row.t >= t0) sup = std::max(sup, row.x.norm());
        }
        out.sup_x = sup;
        try {
            const DecayFit fit = decay_fit(trace, t0, t_end);
            out.decay_rate = fit.rate;
            out.r_squared = fit.r_squared;
            out.success = fit.rate > 0.0 && fit.r_squared >= 0.9;
        } catch (const UndefinedFit&) {
            // Identically zero window: the equilibrium, trivially converged.
            out.success = true;
        }
    } else {
        const double t0 = 0.7 * t_end;
        double sup = 0.0;
        for (const auto& row : trace.rows) {
            if (row.t >= t0) sup = std::max(sup, row.x.norm());
        }
        out.sup_x = sup;
        out.success = std::isfinite(sup) && sup <= 10.0 * amp;
    }
    return out.success;
}

int worker_threads() {
    if (const char* env = std::getenv("PREDICTORLAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, omp_get_max_threads()));
    }
    return omp_get_max_threads();
}

SweepResult run_sweep(const SweepSpec& spec) {
    const SweepContext ctx = prepare(spec);
    SweepResult res;
    for (const auto& ax : spec.axes) res.axes.push_back(ax.axis);
    res.points.resize(ctx.configs.size());
    const long count = static_cast<long>(ctx.configs.size());
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
    for (long i = 0; i < count; ++i) {
        res.points[static_cast<std::size_t>(i)] = run_point(spec, ctx, static_cast<std::size_t>(i));
    }
    return res;
}

SweepResult run_sweep_serial(const SweepSpec& spec) {
    const SweepContext ctx = prepare(spec);
    SweepResult res;
    for (const auto& ax : spec.axes) res.axes.push_back(ax.axis);
    for (std::size_t i = 0; i < ctx.configs.size(); ++i) res.points.push_back(run_point(spec, ctx, i));
    return res;
}

ConvergenceCurve predictor_convergence_study(const StrictFeedbackPlant& plant, int m, int l_min, int l_max,
                                             int trials, std::uint64_t seed, int nq) {
    if (l_min < 1 || l_max < l_min) throw InvalidArgument("predictor_convergence_study: bad l range");
    if (trials < 1) throw InvalidArgument("predictor_convergence_study: trials must be >= 1");
    PredictorConfig cfg{1, m, nq};
    cfg.validate(plant);

    std::vector<TrialErrors> per_trial(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
    for (int t = 0; t < trials; ++t) {
        per_trial[static_cast<std::size_t>(t)] = predictor_trial(plant, cfg, l_max, seed, static_cast<std::uint64_t>(t));
    }

    ConvergenceCurve c;
    c.rho = cfg.contraction(plant);
    for (int l = l_min; l <= l_max; ++l) {
        double mx = 0.0;
        for (const auto& te : per_trial) mx = std::max(mx, te.errors[static_cast<std::size_t>(l - 1)]);
        c.l.push_back(l);
        c.max_error.push_back(mx);
    }
    // Geometric ratio from a log-linear fit; zero errors carry no slope information.
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < c.l.size(); ++i) {
        if (!(c.max_error[i] > 0.0)) continue;
        const double x = c.l[i];
        const double y = std::log(c.max_error[i]);
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    c.fitted_ratio = n >= 2 && den > 0.0 ? std::exp((n * sxy - sx * sy) / den) : 0.0;
    return c;
}

}  // namespace predictorlab
