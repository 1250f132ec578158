#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace predictorlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Next sampling instant of the perturbed schedule: tau + T1 * exp(-b).
double schedule_next(double tau_i, double T1, double b_val);

// Deterministic test signal used for disturbances d(t), measurement errors
// xi(t) and the sampling perturbation b(t).
class ExogenousSignal {
public:
    struct Zero {
        bool operator==(const Zero&) const = default;
    };
    struct Constant {
        double value = 0.0;
        bool operator==(const Constant&) const = default;
    };
    // amplitude * sin(frequency * t + phase), frequency in rad/s
    struct Sinusoid {
        double amplitude = 0.0;
        double frequency = 1.0;
        double phase = 0.0;
        bool operator==(const Sinusoid&) const = default;
    };
    // (start, value) rows; zero before the first start.
    struct PiecewiseConstant {
        std::vector<std::pair<double, double>> table;
        bool operator==(const PiecewiseConstant&) const = default;
    };
    // offset + amplitude * U(-1, 1), a pure function of (seed, t).
    struct UniformNoise {
        double amplitude = 0.0;
        std::uint64_t seed = 0;
        double offset = 0.0;
        bool operator==(const UniformNoise&) const = default;
    };
    using Kind = std::variant<Zero, Constant, Sinusoid, PiecewiseConstant, UniformNoise>;

    ExogenousSignal() = default;
    ExogenousSignal(Kind kind);  // NOLINT(google-explicit-constructor)
    template <class T>
        requires(!std::is_same_v<std::decay_t<T>, Kind> && std::is_constructible_v<Kind, T>)
    ExogenousSignal(T alternative) : ExogenousSignal(Kind(std::move(alternative))) {}  // NOLINT

    double operator()(double t) const;

    const Kind& kind() const { return kind_; }
    bool is_zero() const;
    // Upper bound of |value| over all t.
    double sup_abs() const;

    bool operator==(const ExogenousSignal&) const = default;

private:
    Kind kind_{Zero{}};
};

class SamplingSchedule {
public:
    SamplingSchedule(double base_period, ExogenousSignal perturbation);

    double base_period() const { return base_period_; }
    const ExogenousSignal& perturbation() const { return perturbation_; }

    double next(double tau_i) const;
    // All tau_i <= t_end, starting at tau_0 = 0.
    std::vector<double> times_until(double t_end) const;

private:
    double base_period_;
    ExogenousSignal perturbation_;
};

struct ZohSegment {
    double start;
    double value;
    bool operator==(const ZohSegment&) const = default;
};

// Piecewise-constant signal on [domain_start, domain_end). Segment j holds
// its value on the right-open interval [start_j, start_{j+1}).
class ZohSignal {
public:
    ZohSignal(std::vector<ZohSegment> segments, double domain_end = kInf);

    static ZohSignal constant(double start, double end, double value);

    // Appends a new segment; start must exceed the last segment start and
    // lie below the domain end.
    void append(double start, double value);

    double domain_start() const { return segments_.front().start; }
    double domain_end() const { return domain_end_; }
    std::span<const ZohSegment> segments() const { return segments_; }

    double eval(double t) const;
    // Exact integral over [a, b] as a finite sum of length * value terms.
    double integral(double a, double b) const;
    // max |u| over [a, b) (exact for piecewise-constant signals).
    double sup_abs(double a, double b) const;
    double sup_abs() const { return sup_abs(domain_start(), domain_end()); }
    // Restriction to [a, b), re-based so that time a maps to 0.
    ZohSignal window(double a, double b) const;

    bool operator==(const ZohSignal&) const = default;

private:
    std::size_t covering_index(double t) const;

    std::vector<ZohSegment> segments_;
    double domain_end_;
};

// v(s) = u(t_now - r_plus_tau + s) on [0, r_plus_tau).
ZohSignal shift_history(const ZohSignal& u, double t_now, double r_plus_tau);

// Dense record of x(t) with derivatives, cubic Hermite interpolation between
// nodes.
class StateHistory {
public:
    explicit StateHistory(int dim);

    // Two-node record of a constant state over [t0, t1].
    static StateHistory constant(const Vector& x, double t0, double t1);

    void append(double t, const Vector& x, const Vector& dx);

    int dim() const { return dim_; }
    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    std::span<const double> times() const { return times_; }
    Vector node(std::size_t k) const;

    Vector sample(double t) const;
    // max over stored nodes in [a, b] of |x|.
    double sup_norm(double a, double b) const;

private:
    int dim_;
    std::vector<double> times_;
    std::vector<double> values_;
    std::vector<double> derivs_;
};

}  // namespace predictorlab
