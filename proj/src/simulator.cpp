#include "predictorlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "predictorlab/errors.hpp"
#include "predictorlab/integrator.hpp"

namespace predictorlab {

namespace {

bool same_vector(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

// b must stay non-negative for the schedule to be well defined.
bool non_negative_signal(const ExogenousSignal& s) {
    const auto& k = s.kind();
    if (std::holds_alternative<ExogenousSignal::Zero>(k)) return true;
    if (auto c = std::get_if<ExogenousSignal::Constant>(&k)) return c->value >= 0.0;
    if (auto sn = std::get_if<ExogenousSignal::Sinusoid>(&k)) return sn->amplitude == 0.0;
    if (auto pc = std::get_if<ExogenousSignal::PiecewiseConstant>(&k)) {
        return std::all_of(pc->table.begin(), pc->table.end(), [](const auto& row) { return row.second >= 0.0; });
    }
    const auto& n = std::get<ExogenousSignal::UniformNoise>(k);
    return n.offset >= std::abs(n.amplitude);
}

ExogenousSignal reseeded(const ExogenousSignal& s, std::uint64_t seed) {
    if (auto n = std::get_if<ExogenousSignal::UniformNoise>(&s.kind())) {
        auto copy = *n;
        copy.seed += seed;
        return ExogenousSignal(copy);
    }
    return s;
}

// Plant-specific pieces of the loop behind a uniform interface.
struct Model {
    int n = 0;
    int d_dim = 0;
    double r = 0.0;
    double tau = 0.0;
    std::function<Vector(const Vector& x, double u_delayed, const Vector& d)> plant;
    std::function<ObserverDerivative(const ObserverState& s, double u_lagged)> observer;
    // Predicted state used by the feedback at a hold.
    std::function<Vector(const Vector& z, const ZohSignal& u, double t)> predict;
    std::function<double(const Vector& x)> output;
};

Model make_model(const SimConfig& cfg, const AnyPlant& any) {
    Model m;
    if (auto sp = std::get_if<StrictFeedbackPlant>(&any)) {
        const StrictFeedbackPlant& plant = *sp;
        auto gains = std::make_shared<ObserverGains>(plant, cfg.p, cfg.theta);
        m.n = plant.dim();
        m.d_dim = plant.dim();
        m.r = plant.measurement_delay();
        m.tau = plant.input_delay();
        m.plant = [&plant](const Vector& x, double u, const Vector& d) { return plant_rhs(plant, x, u, d); };
        m.observer = [&plant, gains](const ObserverState& s, double u) { return observer_rhs(plant, *gains, s, u); };
        const PredictorConfig pc = cfg.predictor;
        m.predict = [&plant, pc](const Vector& z, const ZohSignal& u, double t) { return phi(plant, pc, z, u, t); };
        m.output = [](const Vector& x) { return x(0); };
    } else {
        const LtiPlant& plant = std::get<LtiPlant>(any);
        const Vector p = cfg.p;
        m.n = plant.dim();
        m.d_dim = static_cast<int>(plant.G.cols());
        m.r = plant.r;
        m.tau = plant.tau;
        m.plant = [&plant](const Vector& x, double u, const Vector& d) { return lti_rhs(plant, x, u, d); };
        m.observer = [&plant, p](const ObserverState& s, double u) { return lti_observer_rhs(plant, p, s, u); };
        m.predict = [&plant](const Vector& z, const ZohSignal& u, double t) { return lti_predict(plant, z, u, t); };
        m.output = [&plant](const Vector& x) { return plant.c.dot(x); };
    }
    return m;
}

Vector eval_d(const std::vector<ExogenousSignal>& d, int dim, double t) {
    Vector v = Vector::Zero(dim);
    for (std::size_t i = 0; i < d.size(); ++i) v(static_cast<Eigen::Index>(i)) = d[i](t);
    return v;
}

int plant_dim(const AnyPlant& p) {
    return std::visit([](const auto& q) { return q.dim(); }, p);
}

double total_delay(const AnyPlant& p) {
    return std::visit([](const auto& q) { return q.total_delay(); }, p);
}

}  // namespace

void SimConfig::validate() const {
    const AnyPlant any = catalog_get(plant);
    const int n = plant_dim(any);
    const double rpt = total_delay(any);
    if (k.size() != n || p.size() != n || x0.size() != n || z0.size() != n) {
        throw InvalidArgument("SimConfig: k, p, x0, z0 must have the plant dimension");
    }
    if (!k.allFinite() || !p.allFinite() || !x0.allFinite() || !z0.allFinite() || !std::isfinite(w0)) {
        throw InvalidArgument("SimConfig: non-finite vector entries");
    }
    for (double v : {T1, T2, t_end, h}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("SimConfig: T1, T2, t_end, h must be positive");
    }
    if (h > std::min(T1, T2) / 4.0 * (1.0 + 1e-12)) throw InvalidArgument("SimConfig: h must be <= min(T1, T2)/4");
    if (!(k_hat >= 0.0) || !std::isfinite(k_hat)) throw InvalidArgument("SimConfig: k_hat must be non-negative");
    if (!non_negative_signal(b)) throw InvalidArgument("SimConfig: b must be non-negative");

    if (u0.empty()) throw InvalidArgument("SimConfig: u0 must cover [-r - tau, 0)");
    if (u0.front().start > -rpt + 1e-12) throw InvalidArgument("SimConfig: u0 must start at or before -r - tau");
    for (std::size_t i = 0; i < u0.size(); ++i) {
        if (!std::isfinite(u0[i].value) || !(u0[i].start < 0.0)) {
            throw InvalidArgument("SimConfig: u0 segments must start before 0 with finite values");
        }
        if (i > 0 && !(u0[i].start > u0[i - 1].start)) throw InvalidArgument("SimConfig: u0 starts must increase");
    }

    if (auto sp = std::get_if<StrictFeedbackPlant>(&any)) {
        if (mode != PredictorMode::Approximate) {
            throw InvalidArgument("SimConfig: the exact predictor applies to LTI plants only");
        }
        if (!d.empty() && static_cast<int>(d.size()) != n) throw InvalidArgument("SimConfig: d needs n components");
        predictor.validate(*sp);
        FeedbackGains fg(*sp, k);
        ObserverGains og(*sp, p, theta);
    } else {
        const auto& lp = std::get<LtiPlant>(any);
        if (mode != PredictorMode::ExactLti) throw InvalidArgument("SimConfig: LTI plants use the exact predictor");
        if (!d.empty() && static_cast<Eigen::Index>(d.size()) != lp.G.cols()) {
            throw InvalidArgument("SimConfig: d needs one component per column of G");
        }
        FeedbackGains fg(lp, k);
        ObserverGains og(lp, p);
    }
}

bool SimConfig::operator==(const SimConfig& o) const {
    return plant == o.plant && same_vector(k, o.k) && same_vector(p, o.p) && theta == o.theta && mode == o.mode &&
           predictor == o.predictor && T1 == o.T1 && T2 == o.T2 && t_end == o.t_end && h == o.h &&
           same_vector(x0, o.x0) && u0 == o.u0 && same_vector(z0, o.z0) && w0 == o.w0 && d == o.d && xi == o.xi &&
           b == o.b && monitors == o.monitors && k_hat == o.k_hat && seed == o.seed;
}

HybridEventQueue::HybridEventQueue(double T1, double T2, ExogenousSignal b) : T1_(T1), T2_(T2), b_(std::move(b)) {
    if (!(T1_ > 0.0) || !(T2_ > 0.0)) throw InvalidArgument("HybridEventQueue: periods must be positive");
    last_b_ = b_(0.0);
    next_sample_ = schedule_next(0.0, T1_, last_b_);
}

double HybridEventQueue::peek() const {
    const double hold = static_cast<double>(next_hold_) * T2_;
    if (std::abs(hold - next_sample_) <= kEventMerge) return hold;
    return std::min(hold, next_sample_);
}

HybridEventQueue::Event HybridEventQueue::pop() {
    const double hold = static_cast<double>(next_hold_) * T2_;
    const double t = std::min(hold, next_sample_);
    Event ev{t, false, false, 0.0};
    if (next_sample_ <= t + kEventMerge) {
        ev.sample = true;
        // A merged sample takes the hold time; the schedule continues from it.
        const double ts = std::abs(hold - next_sample_) <= kEventMerge ? hold : next_sample_;
        ev.t = ts;
        last_sample_ = ts;
        last_b_ = b_(ts);
        ev.b = last_b_;
        next_sample_ = schedule_next(ts, T1_, last_b_);
    }
    if (hold <= t + kEventMerge) {
        ev.hold = true;
        ev.t = hold;
        ++next_hold_;
    }
    return ev;
}

double measure(const StateHistory& initial, const StateHistory& history, double t_sample, double r, double xi) {
    const double s = t_sample - r;
    const Vector x = s < 0.0 ? initial.sample(s) : history.sample(s);
    return x(0) + xi;
}

SimTrace run_closed_loop_partial(const SimConfig& cfg) {
    cfg.validate();
    const AnyPlant any = catalog_get(cfg.plant);
    const Model M = make_model(cfg, any);
    const int n = M.n;
    const double r = M.r;
    const double tau = M.tau;

    std::vector<ExogenousSignal> d;
    for (const auto& s : cfg.d) d.push_back(reseeded(s, cfg.seed));
    const ExogenousSignal xi = reseeded(cfg.xi, cfg.seed);
    const ExogenousSignal bsig = reseeded(cfg.b, cfg.seed);

    SimTrace tr;
    tr.n = n;
    tr.r = r;
    tr.tau = tau;
    tr.T2 = cfg.T2;
    tr.j_bar = static_cast<int>(std::ceil((r + cfg.T1) / cfg.T2 - 1e-12));
    tr.z0 = cfg.z0;
    tr.w0 = cfg.w0;
    tr.inputs.emplace(cfg.u0);
    tr.initial_history.emplace(StateHistory::constant(cfg.x0, r > 0.0 ? -r : -1.0, 0.0));
    tr.history.emplace(n);
    ZohSignal& inputs = *tr.inputs;
    StateHistory& hist = *tr.history;

    const auto joint_rhs = [&](double t, const Vector& s, double t_hold) {
        Vector ds(2 * n + 1);
        ds.head(n) = M.plant(s.head(n), inputs.eval(t_hold - tau), eval_d(d, M.d_dim, t));
        const ObserverDerivative od = M.observer({s.segment(n, n), s(2 * n)}, inputs.eval(t_hold - r - tau));
        ds.segment(n, n) = od.dz;
        ds(2 * n) = od.dw;
        return ds;
    };

    Vector s(2 * n + 1);
    s << cfg.x0, cfg.z0, cfg.w0;
    double t = 0.0;
    hist.append(0.0, cfg.x0, M.plant(cfg.x0, inputs.eval(-tau), eval_d(d, M.d_dim, 0.0)));

    double y_last = kNaN;
    double xi_last = kNaN;
    HybridEventQueue queue(cfg.T1, cfg.T2, bsig);

    const auto record = [&](double tn) {
        TraceRow row;
        row.t = tn;
        row.x = s.head(n);
        row.z = s.segment(n, n);
        row.w = s(2 * n);
        row.u = inputs.eval(tn);
        row.u_delayed = inputs.eval(tn - tau);
        row.y = y_last;
        row.d = eval_d(d, M.d_dim, tn).norm();
        row.xi = xi_last;
        tr.rows.push_back(std::move(row));
    };

    // First breakpoint of u(. - delay) strictly after t.
    const auto next_breakpoint = [&](double after, double delay) {
        const auto segs = inputs.segments();
        auto it = std::upper_bound(segs.begin(), segs.end(), after + kEventMerge - delay,
                                   [](double v, const ZohSegment& sg) { return v < sg.start; });
        return it == segs.end() ? kInf : it->start + delay;
    };

    const double t_end = cfg.t_end;
    while (true) {
        while (queue.peek() <= t + kEventMerge) {
            const auto ev = queue.pop();
            if (ev.sample) {
                xi_last = xi(ev.t);
                const double meas_t = ev.t - r;
                const Vector xm = meas_t < 0.0 ? tr.initial_history->sample(meas_t) : hist.sample(meas_t);
                y_last = M.output(xm) + xi_last;
                const ObserverState js = observer_jump({s.segment(n, n), s(2 * n)}, y_last);
                s(2 * n) = js.w;
                tr.samples.push_back({ev.t, y_last, xi_last, ev.b});
            }
            if (ev.hold) {
                const Vector z = s.segment(n, n);
                const Vector pred = M.predict(z, inputs, ev.t);
                const double u = cfg.k.dot(pred);
                const double sup_u = inputs.sup_abs(ev.t - r - tau, ev.t);
                inputs.append(ev.t, u);
                tr.holds.push_back({ev.t, z, pred, sup_u, u});
            }
        }
        record(t);
        if (t >= t_end - kEventMerge) break;

        double target = std::min({queue.peek(), t_end, next_breakpoint(t, tau), next_breakpoint(t, r + tau)});
        // Delayed breakpoints can fall a few ulps short of the hold they
        // belong to; land on the event time itself.
        if (std::abs(queue.peek() - target) <= kEventMerge) target = queue.peek();
        const double t0 = t;
        const auto steps = std::max<long>(1, static_cast<long>(std::ceil((target - t0) / cfg.h - 1e-9)));
        const double hs = (target - t0) / static_cast<double>(steps);
        bool diverged = false;
        for (long k = 0; k < steps; ++k) {
            const double ts = t0 + static_cast<double>(k) * hs;
            const double te = k + 1 == steps ? target : t0 + static_cast<double>(k + 1) * hs;
            const double t_hold = 0.5 * (ts + te);
            const Vector next = rk4_step(joint_rhs, ts, s, te - ts);
            if (!next.allFinite() || next.lpNorm<Eigen::Infinity>() > kDivergenceLimit) {
                diverged = true;
                break;
            }
            s = next;
            t = te;
            hist.append(te, s.head(n), M.plant(s.head(n), inputs.eval(t_hold - tau), eval_d(d, M.d_dim, te)));
            if (k + 1 < steps) record(te);
        }
        if (diverged) {
            tr.diverged_at = t;
            break;
        }
    }

    if (cfg.monitors && std::holds_alternative<StrictFeedbackPlant>(any) && !tr.diverged_at) run_monitors(tr, cfg);
    return tr;
}

SimTrace run_closed_loop(const SimConfig& cfg) {
    SimTrace tr = run_closed_loop_partial(cfg);
    if (tr.diverged_at) throw DivergenceError("run_closed_loop: state diverged", *tr.diverged_at);
    return tr;
}

MonitorReport run_monitors(SimTrace& trace, const SimConfig& cfg) {
    const AnyPlant any = catalog_get(cfg.plant);
    const auto* sp = std::get_if<StrictFeedbackPlant>(&any);
    if (!sp) throw InvalidArgument("run_monitors: strict-feedback plant required");
    if (trace.rows.empty() || !trace.inputs || !trace.history || !trace.initial_history) {
        throw InvalidArgument("run_monitors: incomplete trace");
    }
    const StrictFeedbackPlant& plant = *sp;
    const DerivedConstants dc = derived_constants(plant, cfg.theta, cfg.p, cfg.predictor, cfg.k_hat);
    const TraceSups sups = compute_sups(trace);
    const std::size_t rows = trace.rows.size();
    const double G = plant.gain_bound();
    const double T1 = cfg.T1;
    const double T2 = cfg.T2;

    // Forward completeness of the plant.
    BoundSeries b24;
    const double x0n = trace.rows.front().x.norm();
    for (std::size_t k = 0; k < rows; ++k) {
        const double rhs = forward_bound(plant, x0n, sups.d[k], sups.u_input[k], trace.rows[k].t);
        b24.rhs.push_back(rhs);
        b24.margins.push_back(rhs - trace.rows[k].x.norm());
    }
    finalize_bound(b24);

    // Predictor growth, evaluated at holds and carried forward to rows.
    BoundSeries b214;
    {
        std::size_t h = 0;
        double margin = kInf, rhs = kInf;
        for (std::size_t k = 0; k < rows; ++k) {
            while (h < trace.holds.size() && trace.holds[h].t <= trace.rows[k].t + kEventMerge) {
                const HoldRecord& hr = trace.holds[h];
                rhs = dc.Gamma * (hr.z.norm() + hr.sup_u);
                margin = rhs - hr.prediction.norm();
                ++h;
            }
            b214.rhs.push_back(rhs);
            b214.margins.push_back(margin);
        }
        finalize_bound(b214);
    }

    const ExogenousSignal bsig = reseeded(cfg.b, cfg.seed);
    const double b0 = bsig(0.0);
    double b_run = b0;
    for (const auto& sr : trace.samples) b_run = std::max(b_run, sr.b);
    const BoundSeries b223 = observer_bound_monitor(trace, dc, T1, b_run);

    // Closed-loop growth, in log domain to avoid overflow of the power.
    BoundSeries b224;
    {
        const double x0_sup = trace.initial_history->sup_norm(trace.initial_history->t_begin(), 0.0);
        const double u0_sup = trace.inputs->sup_abs(trace.inputs->domain_start(), 0.0);
        const double init = trace.z0.norm() + std::abs(trace.w0) + x0_sup + u0_sup;
        for (std::size_t k = 0; k < rows; ++k) {
            const double t = trace.rows[k].t;
            const double b_sup = std::max(b0, sups.b[k]);
            const double xi_term = init + sups.xi[k] + G * sups.d[k];
            const double log_base = std::log(7.0 * (1.0 + dc.Gamma)) + dc.beta * T2 -
                                    0.5 * std::log1p(-std::exp(-2.0 * dc.omega * T1 * std::exp(-b_sup)));
            const double g = std::ceil(t / T2);
            const double rhs = xi_term > 0.0 ? std::exp(g * log_base + std::log(xi_term)) : 0.0;
            const double lhs = sups.zw[k] + sups.x_full[k] + sups.u_open[k];
            b224.rhs.push_back(rhs);
            b224.margins.push_back(rhs - lhs);
        }
        finalize_bound(b224);
    }

    for (std::size_t k = 0; k < rows; ++k) {
        TraceRow& row = trace.rows[k];
        row.m24 = b24.margins[k];
        row.m214 = b214.margins[k];
        row.m223 = b223.margins[k];
        row.m224 = b224.margins[k];
    }
    MonitorReport rep;
    rep.m24 = b24.min_margin;
    rep.m214 = b214.min_margin;
    rep.m223 = b223.min_margin;
    rep.m224 = b224.min_margin;
    rep.rel24 = b24.min_relative;
    rep.rel214 = b214.min_relative;
    rep.rel223 = b223.min_relative;
    rep.rel224 = b224.min_relative;
    return rep;
}

double closed_loop_error(const SimTrace& trace, std::size_t k) {
    const TraceRow& row = trace.rows.at(k);
    return row.x.norm() + (row.z - trace.state_at(row.t - trace.r)).norm();
}

DecayFit decay_fit(const SimTrace& trace, double t_start, double t_end) {
    if (!(t_start < t_end)) throw InvalidArgument("decay_fit: empty window");
    if (trace.rows.empty() || t_start < trace.rows.front().t - kEventMerge ||
        t_end > trace.rows.back().t + kEventMerge) {
        throw InvalidArgument("decay_fit: window outside the trace");
    }
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
        const double t = trace.rows[k].t;
        if (t < t_start || t > t_end) continue;
        const double e = closed_loop_error(trace, k);
        if (!(e > 0.0)) continue;
        const double y = std::log(e);
        n += 1;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        syy += y * y;
    }
    if (n < 2) throw UndefinedFit("decay_fit: fewer than two nonzero points in the window");
    const double vt = stt - st * st / n;
    const double vy = syy - sy * sy / n;
    const double cty = sty - st * sy / n;
    if (!(vt > 0.0)) throw UndefinedFit("decay_fit: degenerate time window");
    const double slope = cty / vt;
    const double r2 = vy > 0.0 ? std::clamp(cty * cty / (vt * vy), 0.0, 1.0) : 1.0;
    return {-slope, r2};
}

}  // namespace predictorlab
