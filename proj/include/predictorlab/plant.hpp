#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "predictorlab/signals.hpp"

namespace predictorlab {

struct PredictorConfig;

// f_i receives the prefix (x_1, ..., x_i).
using TriangularField = std::function<double(std::span<const double>)>;
// g_i receives the full state and the (delayed) input.
using DisturbanceGain = std::function<double(std::span<const double>, double)>;

// Grid used to spot-check the declared Lipschitz constant L and gain bound G
// at construction.
struct AuditGrid {
    int samples = 512;
    double radius = 10.0;
    std::uint64_t seed = 1;
};

// Strict-feedback system
//   x_i' = f_i(x_1..x_i) + x_{i+1} + g_i(x, u(t - tau)) d_i,   i < n
//   x_n' = f_n(x) + g_n(x, u(t - tau)) d_n + u(t - tau)
// with measurement delay r and input delay tau.
class StrictFeedbackPlant {
public:
    StrictFeedbackPlant(std::string name, std::vector<TriangularField> f, std::vector<DisturbanceGain> g,
                        double lipschitz, double gain_bound, double measurement_delay, double input_delay,
                        AuditGrid audit = {});

    const std::string& name() const { return name_; }
    int dim() const { return static_cast<int>(f_.size()); }
    double lipschitz() const { return lipschitz_; }
    double gain_bound() const { return gain_bound_; }
    double measurement_delay() const { return r_; }
    double input_delay() const { return tau_; }
    double total_delay() const { return r_ + tau_; }

    // (f_1(x_1), ..., f_n(x_1..x_n))
    Vector f(const Vector& x) const;
    double f_component(int i, std::span<const double> x) const;
    Vector g(const Vector& x, double u) const;

    // Canonical chain-of-integrators data: A superdiagonal, b = e_n, c = e_1.
    Matrix chain_matrix() const;
    Vector input_vector() const;
    Vector output_vector() const;

    // Largest |f_i(x) - f_i(z)| - L |x - z| over seeded random pairs with
    // |x|, |z| <= radius. Non-positive means the declared L held.
    double lipschitz_excess(int pairs, double radius, std::uint64_t seed) const;
    // Largest |g_i(x, u)| - G over seeded random points.
    double gain_excess(int points, double radius, std::uint64_t seed) const;

private:
    std::string name_;
    std::vector<TriangularField> f_;
    std::vector<DisturbanceGain> g_;
    double lipschitz_;
    double gain_bound_;
    double r_;
    double tau_;
};

// x' = A x + B u(t - tau) + G d,  y(tau_i) = c'x(tau_i - r) + xi(tau_i)
struct LtiPlant {
    std::string name;
    Matrix A;
    Vector B;
    Matrix G;
    Vector c;
    double r = 0.0;
    double tau = 0.0;

    int dim() const { return static_cast<int>(A.rows()); }
    double total_delay() const { return r + tau; }
    // Throws InvalidArgument on inconsistent shapes or delays.
    void validate() const;
};

using AnyPlant = std::variant<StrictFeedbackPlant, LtiPlant>;

Vector plant_rhs(const StrictFeedbackPlant& p, const Vector& x, double u_delayed, const Vector& d);
Vector delay_free_rhs(const StrictFeedbackPlant& p, const Vector& x, double u);
Vector lti_rhs(const LtiPlant& p, const Vector& x, double u_delayed, const Vector& d);

// Forward-completeness estimate
//   (|x0| + (G sup|d| + sup|u|) / sqrt((n+1)L+3)) * exp(((n+1)L+3) t / 2)
double forward_bound(const StrictFeedbackPlant& p, double x0_norm, double sup_d, double sup_u, double t);

// Registered plants: "example4", "linear2", "integrator2" (strict feedback)
// and "lti" (linear time invariant).
AnyPlant catalog_get(const std::string& name);
std::vector<std::string> catalog_names();

struct DerivedConstants {
    double omega;   // observer bound rate
    double beta;    // closed-loop growth rate
    double Gamma;   // predictor growth constant
    double rho;     // contraction factor (nL+1)T
    double C;       // predictor error coefficient K rho^{l+1} / (1 - rho)
};

DerivedConstants derived_constants(const StrictFeedbackPlant& p, double theta, const Vector& gains_p,
                                   const PredictorConfig& cfg, double K);

}  // namespace predictorlab
