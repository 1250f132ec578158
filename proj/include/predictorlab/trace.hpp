#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "predictorlab/signals.hpp"

namespace predictorlab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TraceRow {
    double t;
    Vector x;
    Vector z;
    double w;
    double u;          // u(t), the ZOH value currently commanded
    double u_delayed;  // u(t - tau), the value driving the plant
    double y;          // latest measurement
    double d;          // |d(t)|
    double xi;         // latest measurement error
    double m24 = kNaN;
    double m214 = kNaN;
    double m223 = kNaN;
    double m224 = kNaN;
};

struct SampleRecord {
    double t;
    double y;
    double xi;
    double b;  // b(t) used to schedule the next sample
};

struct HoldRecord {
    double t;
    Vector z;
    Vector prediction;
    double sup_u;  // sup |u| over the open history [t - r - tau, t)
    double u;
};

// Output of one closed-loop run.
struct SimTrace {
    int n = 0;
    double r = 0.0;
    double tau = 0.0;
    double T2 = 0.0;
    // j_bar = min{j : j T2 >= r + T1}
    int j_bar = 0;
    std::vector<TraceRow> rows;
    std::vector<SampleRecord> samples;
    std::vector<HoldRecord> holds;
    // u over [-r - tau, t_end), initial history included.
    std::optional<ZohSignal> inputs;
    std::optional<StateHistory> initial_history;  // x on [-r, 0]
    std::optional<StateHistory> history;          // x on [0, t_end]
    Vector z0;
    double w0 = 0.0;
    // Set when the run aborted on divergence.
    std::optional<double> diverged_at;

    // x(t) for t in [-r, t_end], initial history for t < 0.
    Vector state_at(double t) const;
};

// Running suprema along the trace rows, one entry per row.
struct TraceSups {
    std::vector<double> x_lagged;     // sup_{0<=s<=t} |x(s - r)|
    std::vector<double> x_full;       // sup_{-r<=s<=t} |x(s)|
    std::vector<double> u_lagged;     // sup_{0<=s<t} |u(s - r - tau)|
    std::vector<double> u_input;      // sup_{-tau<=s<t-tau} |u(s)|
    std::vector<double> u_open;       // sup_{-r-tau<=s<t} |u(s)|
    std::vector<double> d;            // sup_{0<=s<=t} |d(s)|
    std::vector<double> xi;           // sup of |xi| over samples up to t
    std::vector<double> b;            // sup of b over samples up to t
    std::vector<double> zw;           // sup_{0<=s<=t} (|z(s)| + |w(s)|)
};

TraceSups compute_sups(const SimTrace& trace);

// Margins RHS - LHS of a theorem bound evaluated along the trace.
struct BoundSeries {
    std::vector<double> margins;
    std::vector<double> rhs;
    double min_margin = kInf;
    // min over rows of margin / max(RHS, tiny)
    double min_relative = kInf;
};

void finalize_bound(BoundSeries& s);

}  // namespace predictorlab
