#include "predictorlab/plant.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "predictorlab/errors.hpp"
#include "predictorlab/predictor.hpp"

namespace predictorlab {

StrictFeedbackPlant::StrictFeedbackPlant(std::string name, std::vector<TriangularField> f,
                                         std::vector<DisturbanceGain> g, double lipschitz, double gain_bound,
                                         double measurement_delay, double input_delay, AuditGrid audit)
    : name_(std::move(name)),
      f_(std::move(f)),
      g_(std::move(g)),
      lipschitz_(lipschitz),
      gain_bound_(gain_bound),
      r_(measurement_delay),
      tau_(input_delay) {
    if (f_.empty() || f_.size() != g_.size()) {
        throw InvalidArgument("StrictFeedbackPlant: need n >= 1 drift terms and n gain terms");
    }
    if (!(lipschitz_ >= 0.0) || !(gain_bound_ >= 0.0)) {
        throw InvalidArgument("StrictFeedbackPlant: L and G must be non-negative");
    }
    if (!(r_ >= 0.0) || !(tau_ >= 0.0) || !(r_ + tau_ > 0.0)) {
        throw InvalidArgument("StrictFeedbackPlant: delays must satisfy r, tau >= 0 and r + tau > 0");
    }
    const std::vector<double> zero(f_.size(), 0.0);
    for (int i = 0; i < dim(); ++i) {
        if (f_component(i, zero) != 0.0) {
            throw InvalidArgument("StrictFeedbackPlant: f_i(0) must vanish");
        }
    }
    if (audit.samples > 0) {
        if (lipschitz_excess(audit.samples, audit.radius, audit.seed) > 1e-12) {
            throw InvalidArgument("StrictFeedbackPlant: declared Lipschitz constant violated on the audit grid");
        }
        if (gain_excess(audit.samples, audit.radius, audit.seed) > 1e-12) {
            throw InvalidArgument("StrictFeedbackPlant: declared gain bound violated on the audit grid");
        }
    }
}

double StrictFeedbackPlant::f_component(int i, std::span<const double> x) const {
    return f_[static_cast<std::size_t>(i)](x.first(static_cast<std::size_t>(i) + 1));
}

Vector StrictFeedbackPlant::f(const Vector& x) const {
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    Vector out(dim());
    for (int i = 0; i < dim(); ++i) out(i) = f_component(i, xs);
    return out;
}

Vector StrictFeedbackPlant::g(const Vector& x, double u) const {
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    Vector out(dim());
    for (int i = 0; i < dim(); ++i) out(i) = g_[static_cast<std::size_t>(i)](xs, u);
    return out;
}

Matrix StrictFeedbackPlant::chain_matrix() const {
    Matrix A = Matrix::Zero(dim(), dim());
    for (int i = 0; i + 1 < dim(); ++i) A(i, i + 1) = 1.0;
    return A;
}

Vector StrictFeedbackPlant::input_vector() const { return Vector::Unit(dim(), dim() - 1); }

Vector StrictFeedbackPlant::output_vector() const { return Vector::Unit(dim(), 0); }

namespace {

Vector random_point(std::mt19937_64& gen, int n, double radius) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(gen);
    const double norm = v.norm();
    if (norm == 0.0) return v;
    // uniform in the ball
    return v * (radius * std::pow(unit(gen), 1.0 / n) / norm);
}

}  // namespace

double StrictFeedbackPlant::lipschitz_excess(int pairs, double radius, std::uint64_t seed) const {
    std::mt19937_64 gen(seed);
    double worst = -kInf;
    for (int k = 0; k < pairs; ++k) {
        const Vector x = random_point(gen, dim(), radius);
        // Mix far-apart and nearby pairs so local slopes are probed too.
        const Vector z = (k % 2 == 0) ? random_point(gen, dim(), radius)
                                      : Vector(x + random_point(gen, dim(), 1e-3 * radius));
        for (int i = 0; i < dim(); ++i) {
            const auto n = static_cast<Eigen::Index>(i + 1);
            const double lhs = std::abs(f_component(i, {x.data(), static_cast<std::size_t>(n)}) -
                                        f_component(i, {z.data(), static_cast<std::size_t>(n)}));
            worst = std::max(worst, lhs - lipschitz_ * (x.head(n) - z.head(n)).norm());
        }
    }
    return worst;
}

double StrictFeedbackPlant::gain_excess(int points, double radius, std::uint64_t seed) const {
    std::mt19937_64 gen(seed + 1);
    std::uniform_real_distribution<double> uniform(-radius, radius);
    double worst = -kInf;
    for (int k = 0; k < points; ++k) {
        const Vector x = random_point(gen, dim(), radius);
        const Vector gx = g(x, uniform(gen));
        worst = std::max(worst, gx.cwiseAbs().maxCoeff() - gain_bound_);
    }
    return worst;
}

void LtiPlant::validate() const {
    const auto n = A.rows();
    if (n == 0 || A.cols() != n || B.size() != n || c.size() != n || G.rows() != n) {
        throw InvalidArgument("LtiPlant: inconsistent dimensions");
    }
    if (!(r >= 0.0) || !(tau >= 0.0) || !(r + tau > 0.0)) {
        throw InvalidArgument("LtiPlant: delays must satisfy r, tau >= 0 and r + tau > 0");
    }
    if (!A.allFinite() || !B.allFinite() || !G.allFinite() || !c.allFinite()) {
        throw InvalidArgument("LtiPlant: non-finite entries");
    }
}

Vector plant_rhs(const StrictFeedbackPlant& p, const Vector& x, double u_delayed, const Vector& d) {
    if (x.size() != p.dim() || d.size() != p.dim()) {
        throw InvalidArgument("plant_rhs: dimension mismatch");
    }
    const int n = p.dim();
    Vector dx = p.f(x) + p.g(x, u_delayed).cwiseProduct(d);
    dx.head(n - 1) += x.tail(n - 1);
    dx(n - 1) += u_delayed;
    return dx;
}

Vector delay_free_rhs(const StrictFeedbackPlant& p, const Vector& x, double u) {
    if (x.size() != p.dim()) {
        throw InvalidArgument("delay_free_rhs: dimension mismatch");
    }
    const int n = p.dim();
    Vector dx = p.f(x);
    dx.head(n - 1) += x.tail(n - 1);
    dx(n - 1) += u;
    return dx;
}

Vector lti_rhs(const LtiPlant& p, const Vector& x, double u_delayed, const Vector& d) {
    if (x.size() != p.dim() || d.size() != p.G.cols()) {
        throw InvalidArgument("lti_rhs: dimension mismatch");
    }
    return p.A * x + p.B * u_delayed + p.G * d;
}

double forward_bound(const StrictFeedbackPlant& p, double x0_norm, double sup_d, double sup_u, double t) {
    for (double v : {x0_norm, sup_d, sup_u, t}) {
        if (!std::isfinite(v)) throw InvalidArgument("forward_bound: non-finite argument");
    }
    const double rate = (p.dim() + 1) * p.lipschitz() + 3.0;
    return (x0_norm + (p.gain_bound() * sup_d + sup_u) / std::sqrt(rate)) * std::exp(rate * t / 2.0);
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

double example4_drift(double x) { return x * x * (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0)) / std::sqrt(1.0 + x * x); }

StrictFeedbackPlant make_example4() {
    const double L = 4.0 * std::sqrt(2.0) / (3.0 * std::sqrt(3.0));
    return StrictFeedbackPlant(
        "example4",
        {[](std::span<const double> x) { return example4_drift(x[0]); }, [](std::span<const double>) { return 0.0; }},
        {[](std::span<const double>, double) { return 1.0; }, [](std::span<const double>, double) { return 0.0; }},
        L, 1.0, 0.25, 0.25);
}

StrictFeedbackPlant make_linear2() {
    return StrictFeedbackPlant(
        "linear2",
        {[](std::span<const double> x) { return 0.5 * x[0]; }, [](std::span<const double> x) { return -0.25 * x[1]; }},
        {[](std::span<const double>, double) { return 1.0; }, [](std::span<const double>, double) { return 0.0; }},
        0.5, 1.0, 0.25, 0.25);
}

StrictFeedbackPlant make_integrator2() {
    return StrictFeedbackPlant(
        "integrator2", {[](std::span<const double>) { return 0.0; }, [](std::span<const double>) { return 0.0; }},
        {[](std::span<const double>, double) { return 1.0; }, [](std::span<const double>, double) { return 0.0; }},
        0.0, 1.0, 0.25, 0.25);
}

LtiPlant make_lti() {
    LtiPlant p;
    p.name = "lti";
    p.A = Matrix{{0.0, 1.0}, {1.0, 0.0}};
    p.B = Vector{{0.0, 1.0}};
    p.G = Matrix::Identity(2, 2);
    p.c = Vector{{1.0, 0.0}};
    p.r = 0.25;
    p.tau = 0.25;
    p.validate();
    return p;
}

}  // namespace

AnyPlant catalog_get(const std::string& name) {
    if (name == "example4") return make_example4();
    if (name == "linear2") return make_linear2();
    if (name == "integrator2") return make_integrator2();
    if (name == "lti") return make_lti();
    throw LookupError("unknown plant '" + name + "'");
}

std::vector<std::string> catalog_names() { return {"example4", "linear2", "integrator2", "lti"}; }

DerivedConstants derived_constants(const StrictFeedbackPlant& p, double theta, const Vector& gains_p,
                                   const PredictorConfig& cfg, double K) {
    if (!(theta >= 1.0)) throw InvalidArgument("derived_constants: theta must be >= 1");
    if (gains_p.size() != p.dim()) throw InvalidArgument("derived_constants: gain dimension mismatch");
    if (!(K >= 0.0)) throw InvalidArgument("derived_constants: K must be non-negative");
    const int n = p.dim();
    const double L = p.lipschitz();
    const double rho = cfg.contraction(p);
    if (!(rho < 1.0)) throw ContractionViolated("derived_constants: (nL+1)T >= 1");

    double max_gain = 0.0;
    for (int i = 1; i <= n; ++i) {
        max_gain = std::max(max_gain, std::pow(theta, 2 * i) * gains_p(i - 1) * gains_p(i - 1));
    }
    DerivedConstants dc{};
    dc.omega = std::max(L * (n + 1) + 2.0 + 2.0 * n * max_gain, 1.0 + L * L) / 2.0;
    const double growth = (n + 1) * L + 3.0;
    dc.beta = dc.omega + growth / 2.0;
    dc.rho = rho;
    dc.C = K * std::pow(rho, cfg.l + 1) / (1.0 - rho);
    dc.Gamma = dc.C + std::exp(growth / 2.0 * p.total_delay());
    return dc;
}

}  // namespace predictorlab
