#include "predictorlab/signals.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "predictorlab/errors.hpp"

namespace predictorlab {

double schedule_next(double tau_i, double T1, double b_val) {
    if (!std::isfinite(tau_i) || !std::isfinite(T1) || !std::isfinite(b_val)) {
        throw InvalidArgument("schedule_next: non-finite argument");
    }
    if (T1 <= 0.0) {
        throw InvalidArgument("schedule_next: base period must be positive");
    }
    if (b_val < 0.0) {
        throw InvalidArgument("schedule_next: perturbation b must be non-negative");
    }
    return tau_i + T1 * std::exp(-b_val);
}

// ---------------------------------------------------------------------------
// ExogenousSignal

ExogenousSignal::ExogenousSignal(Kind kind) : kind_(std::move(kind)) {
    if (auto* pw = std::get_if<PiecewiseConstant>(&kind_)) {
        for (std::size_t i = 1; i < pw->table.size(); ++i) {
            if (!(pw->table[i].first > pw->table[i - 1].first)) {
                throw InvalidArgument("piecewise-constant signal: starts must be strictly increasing");
            }
        }
    }
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double noise_sample(std::uint64_t seed, double t) {
    std::mt19937_64 gen(seed ^ (std::bit_cast<std::uint64_t>(t) * 0x9E3779B97F4A7C15ULL));
    return std::uniform_real_distribution<double>(-1.0, 1.0)(gen);
}

}  // namespace

double ExogenousSignal::operator()(double t) const {
    return std::visit(
        Overloaded{
            [](const Zero&) { return 0.0; },
            [](const Constant& c) { return c.value; },
            [t](const Sinusoid& s) { return s.amplitude * std::sin(s.frequency * t + s.phase); },
            [t](const PiecewiseConstant& p) {
                auto it = std::upper_bound(p.table.begin(), p.table.end(), t,
                                           [](double v, const auto& row) { return v < row.first; });
                return it == p.table.begin() ? 0.0 : std::prev(it)->second;
            },
            [t](const UniformNoise& n) { return n.offset + n.amplitude * noise_sample(n.seed, t); },
        },
        kind_);
}

bool ExogenousSignal::is_zero() const { return sup_abs() == 0.0; }

double ExogenousSignal::sup_abs() const {
    return std::visit(Overloaded{
                          [](const Zero&) { return 0.0; },
                          [](const Constant& c) { return std::abs(c.value); },
                          [](const Sinusoid& s) { return std::abs(s.amplitude); },
                          [](const PiecewiseConstant& p) {
                              double m = 0.0;
                              for (const auto& row : p.table) m = std::max(m, std::abs(row.second));
                              return m;
                          },
                          [](const UniformNoise& n) { return std::abs(n.offset) + std::abs(n.amplitude); },
                      },
                      kind_);
}

// ---------------------------------------------------------------------------
// SamplingSchedule

SamplingSchedule::SamplingSchedule(double base_period, ExogenousSignal perturbation)
    : base_period_(base_period), perturbation_(std::move(perturbation)) {
    if (!(base_period_ > 0.0) || !std::isfinite(base_period_)) {
        throw InvalidArgument("sampling schedule: base period must be positive and finite");
    }
}

double SamplingSchedule::next(double tau_i) const {
    return schedule_next(tau_i, base_period_, perturbation_(tau_i));
}

std::vector<double> SamplingSchedule::times_until(double t_end) const {
    std::vector<double> out{0.0};
    while (true) {
        double t = next(out.back());
        if (t > t_end) break;
        out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// ZohSignal

ZohSignal::ZohSignal(std::vector<ZohSegment> segments, double domain_end)
    : segments_(std::move(segments)), domain_end_(domain_end) {
    if (segments_.empty()) {
        throw InvalidArgument("ZohSignal: at least one segment required");
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (!std::isfinite(segments_[i].start) || !std::isfinite(segments_[i].value)) {
            throw InvalidArgument("ZohSignal: non-finite segment");
        }
        if (i > 0 && !(segments_[i].start > segments_[i - 1].start)) {
            throw InvalidArgument("ZohSignal: segment starts must be strictly increasing");
        }
    }
    if (!(domain_end_ > segments_.back().start)) {
        throw InvalidArgument("ZohSignal: domain end must follow the last segment start");
    }
}

ZohSignal ZohSignal::constant(double start, double end, double value) {
    return ZohSignal({{start, value}}, end);
}

void ZohSignal::append(double start, double value) {
    if (!std::isfinite(start) || !std::isfinite(value)) {
        throw InvalidArgument("ZohSignal::append: non-finite segment");
    }
    if (!(start > segments_.back().start) || !(start < domain_end_)) {
        throw InvalidArgument("ZohSignal::append: start out of order");
    }
    segments_.push_back({start, value});
}

std::size_t ZohSignal::covering_index(double t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const ZohSegment& s) { return v < s.start; });
    return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

double ZohSignal::eval(double t) const {
    if (!(t >= domain_start()) || !(t < domain_end_)) {
        std::ostringstream os;
        os << "ZohSignal::eval: t=" << t << " outside [" << domain_start() << ", " << domain_end_ << ")";
        throw OutOfDomain(os.str());
    }
    return segments_[covering_index(t)].value;
}

double ZohSignal::integral(double a, double b) const {
    if (!(a <= b) || a < domain_start() || b > domain_end_) {
        throw InvalidArgument("ZohSignal::integral: interval reversed or outside the domain");
    }
    if (a == b) return 0.0;
    double sum = 0.0;
    for (std::size_t j = covering_index(a); j < segments_.size(); ++j) {
        const double lo = std::max(a, segments_[j].start);
        const double seg_end = j + 1 < segments_.size() ? segments_[j + 1].start : domain_end_;
        const double hi = std::min(b, seg_end);
        if (hi > lo) sum += (hi - lo) * segments_[j].value;
        if (seg_end >= b) break;
    }
    return sum;
}

double ZohSignal::sup_abs(double a, double b) const {
    a = std::max(a, domain_start());
    b = std::min(b, domain_end_);
    if (!(a < b)) return 0.0;
    double m = 0.0;
    for (std::size_t j = covering_index(a); j < segments_.size() && segments_[j].start < b; ++j) {
        m = std::max(m, std::abs(segments_[j].value));
    }
    return m;
}

ZohSignal ZohSignal::window(double a, double b) const {
    if (!(a < b) || a < domain_start() || b > domain_end_) {
        throw InvalidArgument("ZohSignal::window: insufficient coverage");
    }
    std::size_t j = covering_index(a);
    std::vector<ZohSegment> out{{0.0, segments_[j].value}};
    for (++j; j < segments_.size() && segments_[j].start < b; ++j) {
        const double s = segments_[j].start - a;
        if (s > out.back().start) out.push_back({s, segments_[j].value});
    }
    return ZohSignal(std::move(out), b - a);
}

ZohSignal shift_history(const ZohSignal& u, double t_now, double r_plus_tau) {
    if (!(r_plus_tau > 0.0)) {
        throw InvalidArgument("shift_history: r + tau must be positive");
    }
    const double origin = t_now - r_plus_tau;
    if (origin < u.domain_start() || t_now > u.domain_end()) {
        throw InvalidArgument("shift_history: input does not cover [t - r - tau, t)");
    }
    ZohSignal v = u.window(origin, t_now);
    // window() measures the length as t_now - origin, which may differ from
    // r_plus_tau by rounding; the predictor splits on r_plus_tau.
    std::vector<ZohSegment> segs(v.segments().begin(), v.segments().end());
    while (segs.size() > 1 && !(segs.back().start < r_plus_tau)) segs.pop_back();
    return ZohSignal(std::move(segs), r_plus_tau);
}

// ---------------------------------------------------------------------------
// StateHistory

StateHistory::StateHistory(int dim) : dim_(dim) {
    if (dim <= 0) throw InvalidArgument("StateHistory: dimension must be positive");
}

StateHistory StateHistory::constant(const Vector& x, double t0, double t1) {
    StateHistory h(static_cast<int>(x.size()));
    const Vector zero = Vector::Zero(x.size());
    h.append(t0, x, zero);
    if (t1 > t0) h.append(t1, x, zero);
    return h;
}

void StateHistory::append(double t, const Vector& x, const Vector& dx) {
    if (x.size() != dim_ || dx.size() != dim_) {
        throw InvalidArgument("StateHistory::append: dimension mismatch");
    }
    if (!times_.empty() && !(t > times_.back())) {
        throw InvalidArgument("StateHistory::append: times must be strictly increasing");
    }
    times_.push_back(t);
    values_.insert(values_.end(), x.data(), x.data() + dim_);
    derivs_.insert(derivs_.end(), dx.data(), dx.data() + dim_);
}

Vector StateHistory::node(std::size_t k) const {
    return Eigen::Map<const Vector>(values_.data() + k * dim_, dim_);
}

Vector StateHistory::sample(double t) const {
    if (times_.empty() || t < times_.front() || t > times_.back()) {
        std::ostringstream os;
        os << "StateHistory::sample: t=" << t << " outside the recorded window";
        throw OutOfDomain(os.str());
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
    if (times_[k] == t) return node(k);

    const double t0 = times_[k];
    const double h = times_[k + 1] - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;

    Eigen::Map<const Vector> x0(values_.data() + k * dim_, dim_);
    Eigen::Map<const Vector> x1(values_.data() + (k + 1) * dim_, dim_);
    Eigen::Map<const Vector> d0(derivs_.data() + k * dim_, dim_);
    Eigen::Map<const Vector> d1(derivs_.data() + (k + 1) * dim_, dim_);
    return h00 * x0 + h10 * h * d0 + h01 * x1 + h11 * h * d1;
}

double StateHistory::sup_norm(double a, double b) const {
    double m = 0.0;
    auto lo = std::lower_bound(times_.begin(), times_.end(), a);
    for (auto it = lo; it != times_.end() && *it <= b; ++it) {
        const auto k = static_cast<std::size_t>(std::distance(times_.begin(), it));
        m = std::max(m, Eigen::Map<const Vector>(values_.data() + k * dim_, dim_).norm());
    }
    return m;
}

}  // namespace predictorlab
