#include "predictorlab/trace.hpp"

#include <algorithm>
#include <cmath>

#include "predictorlab/errors.hpp"

namespace predictorlab {

Vector SimTrace::state_at(double t) const {
    if (!initial_history || !history) throw InvalidArgument("SimTrace::state_at: histories missing");
    if (t < 0.0) return initial_history->sample(t);
    return history->sample(t);
}

namespace {

// Incremental max of |x| over the nodes of a history up to a moving bound.
class NodeSup {
public:
    explicit NodeSup(const StateHistory& h) : h_(h) {}

    double up_to(double t) {
        const auto times = h_.times();
        while (next_ < times.size() && times[next_] <= t) {
            sup_ = std::max(sup_, h_.node(next_).norm());
            ++next_;
        }
        return sup_;
    }

private:
    const StateHistory& h_;
    std::size_t next_ = 0;
    double sup_ = 0.0;
};

// Incremental max of |u| over segments intersecting [start, t).
class SegmentSup {
public:
    SegmentSup(const ZohSignal& u, double start) : u_(u) {
        const auto segs = u_.segments();
        while (next_ + 1 < segs.size() && segs[next_ + 1].start <= start) ++next_;
    }

    double before(double t) {
        const auto segs = u_.segments();
        while (next_ < segs.size() && segs[next_].start < t) {
            sup_ = std::max(sup_, std::abs(segs[next_].value));
            ++next_;
        }
        return sup_;
    }

private:
    const ZohSignal& u_;
    std::size_t next_ = 0;
    double sup_ = 0.0;
};

}  // namespace

TraceSups compute_sups(const SimTrace& trace) {
    if (!trace.inputs || !trace.initial_history || !trace.history) {
        throw InvalidArgument("compute_sups: incomplete trace");
    }
    const std::size_t rows = trace.rows.size();
    TraceSups s;
    for (auto* v : {&s.x_lagged, &s.x_full, &s.u_lagged, &s.u_input, &s.u_open, &s.d, &s.xi, &s.b, &s.zw}) {
        v->resize(rows);
    }

    const double r = trace.r;
    const double tau = trace.tau;
    NodeSup init_lagged(*trace.initial_history), hist_lagged(*trace.history);
    NodeSup init_full(*trace.initial_history), hist_full(*trace.history);
    SegmentSup u_lagged(*trace.inputs, -r - tau), u_input(*trace.inputs, -tau), u_open(*trace.inputs, -r - tau);

    double d_sup = 0.0, zw_sup = 0.0, xi_sup = 0.0, b_sup = 0.0;
    std::size_t sample = 0;
    for (std::size_t k = 0; k < rows; ++k) {
        const TraceRow& row = trace.rows[k];
        const double t = row.t;
        s.x_lagged[k] = std::max(init_lagged.up_to(std::min(0.0, t - r)), t - r >= 0.0 ? hist_lagged.up_to(t - r) : 0.0);
        s.x_full[k] = std::max(init_full.up_to(0.0), hist_full.up_to(t));
        s.u_lagged[k] = t > 0.0 ? u_lagged.before(t - r - tau) : 0.0;
        s.u_input[k] = t > 0.0 ? u_input.before(t - tau) : 0.0;
        s.u_open[k] = u_open.before(t);
        d_sup = std::max(d_sup, row.d);
        s.d[k] = d_sup;
        zw_sup = std::max(zw_sup, row.z.norm() + std::abs(row.w));
        s.zw[k] = zw_sup;
        while (sample < trace.samples.size() && trace.samples[sample].t <= t) {
            xi_sup = std::max(xi_sup, std::abs(trace.samples[sample].xi));
            b_sup = std::max(b_sup, trace.samples[sample].b);
            ++sample;
        }
        s.xi[k] = xi_sup;
        s.b[k] = b_sup;
    }
    return s;
}

void finalize_bound(BoundSeries& s) {
    s.min_margin = kInf;
    s.min_relative = kInf;
    for (std::size_t k = 0; k < s.margins.size(); ++k) {
        s.min_margin = std::min(s.min_margin, s.margins[k]);
        const double scale = std::max(std::abs(s.rhs[k]), 1e-300);
        s.min_relative = std::min(s.min_relative, std::isinf(s.rhs[k]) ? kInf : s.margins[k] / scale);
    }
}

}  // namespace predictorlab
