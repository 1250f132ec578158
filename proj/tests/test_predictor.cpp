#include <doctest.h>

#include <cmath>
#include <random>

#include "predictorlab/errors.hpp"
#include "predictorlab/linalg.hpp"
#include "support.hpp"

using namespace predictorlab;
using namespace testsupport;

namespace {

// Integral of a ZOH signal over [a, b] by walking the segments by hand.
double manual_integral(const ZohSignal& u, double a, double b) {
    double s = 0.0;
    const auto segs = u.segments();
    for (std::size_t j = 0; j < segs.size(); ++j) {
        const double lo = std::max(a, segs[j].start);
        const double hi = std::min(b, j + 1 < segs.size() ? segs[j + 1].start : u.domain_end());
        if (hi > lo) s += (hi - lo) * segs[j].value;
    }
    return s;
}

StrictFeedbackPlant single_integrator() {
    return StrictFeedbackPlant("int1", {[](std::span<const double>) { return 0.0; }},
                               {[](std::span<const double>, double) { return 1.0; }}, 0.0, 1.0, 0.25, 0.25);
}

LtiPlant scalar_lti(double a) {
    LtiPlant p;
    p.name = "scalar";
    p.A = Matrix{{a}};
    p.B = Vector{{1.0}};
    p.G = Matrix{{1.0}};
    p.c = Vector{{1.0}};
    p.r = 0.25;
    p.tau = 0.25;
    return p;
}

}  // namespace

TEST_SUITE("predictor") {

TEST_CASE("config validation") {
    const auto p = example4();
    CHECK(PredictorConfig{1, 2, 256}.contraction(p) == doctest::Approx(0.79433105395181736).epsilon(1e-14));
    CHECK_THROWS_AS(PredictorConfig({1, 1, 256}).validate(p), ContractionViolated);
    CHECK_THROWS_AS(PredictorConfig({0, 2, 256}).validate(p), InvalidArgument);
    CHECK_THROWS_AS(PredictorConfig({1, 2, 0}).validate(p), InvalidArgument);
}

TEST_CASE("picard step on zero and constant grids") {
    const auto p = example4();
    const ZohSignal zero_u = ZohSignal::constant(0.0, 0.25, 0.0);
    const GridFunction z = picard_step(p, constant_grid(Vector::Zero(2), 0.25, 64), zero_u, 0.25);
    CHECK(z.nodes.norm() == 0.0);

    const Vector x0{{1.0, 1.0}};
    const ZohSignal u = ZohSignal::constant(0.0, 0.25, -2.0);
    const GridFunction g = picard_step(p, constant_grid(x0, 0.25, 64), u, 0.25);
    for (int k = 0; k <= 64; k += 8) {
        const double t = 0.25 * k / 64;
        CHECK(g.nodes(k, 0) == doctest::Approx(1.0 + t * (drift(1.0) + 1.0)).epsilon(1e-15));
        CHECK(g.nodes(k, 1) == doctest::Approx(1.0 - 2.0 * t).epsilon(1e-15));
    }
    const Vector end = terminal_value(g);
    CHECK(end(0) == doctest::Approx(1.4267766952966369).epsilon(1e-15));
    CHECK(end(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("single Picard pass equals the explicit one-step formula") {
    const auto p = example4();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (int k = 0; k < 20; ++k) {
        const Vector x0{{U(rng), U(rng)}};
        const ZohSignal u({{0.0, U(rng)}, {0.1, U(rng)}}, 0.25);
        const Vector q = q_operator(p, x0, u, 1, 0.25, 256);
        CHECK(q(0) == doctest::Approx(x0(0) + 0.25 * (drift(x0(0)) + x0(1))).epsilon(1e-14));
        CHECK(q(1) == doctest::Approx(x0(1) + manual_integral(u, 0.0, 0.25)).epsilon(1e-14));
    }
}

TEST_CASE("zero input zero state is a fixed point") {
    const auto p = example4();
    const ZohSignal u = ZohSignal::constant(0.0, 0.5, 0.0);
    for (int l = 1; l <= 5; ++l) CHECK(predict(p, PredictorConfig{l, 2, 64}, Vector::Zero(2), u).norm() == 0.0);
    const ZohSignal hist = ZohSignal::constant(-0.5, 0.0, 0.0);
    CHECK(phi(p, PredictorConfig{}, Vector::Zero(2), hist, 0.0).norm() == 0.0);
}

TEST_CASE("l = 8 single interval is within the a-priori error bound") {
    const auto p = example4();
    const Vector x0{{1.0, 1.0}};
    const ZohSignal u = ZohSignal::constant(0.0, 0.25, -2.0);
    const Vector approx = q_operator(p, x0, u, 8, 0.25, 4096);
    const Vector exact = delay_free_flow(p, x0, u, 0.25, 1e-4);
    const PredictorConfig cfg{8, 2, 4096};
    const double bound = prop21_bound(p, cfg, 0.0734, x0.norm(), 2.0);
    CHECK((approx - exact).norm() <= bound);
    CHECK((approx - exact).norm() < 1e-6);
}

TEST_CASE("two-stage worked-example value") {
    const auto p = example4();
    const ZohSignal u = ZohSignal::constant(0.0, 0.5, -2.0);
    const Vector v = predict(p, PredictorConfig{1, 2, 256}, Vector{{1.0, 1.0}}, u);
    CHECK(v(0) == doctest::Approx(1.8438710667803558).epsilon(1e-15));
    CHECK(std::abs(v(1)) <= 1e-15);

    const ZohSignal hist = ZohSignal::constant(-0.5, 0.0, -2.0);
    const Vector w = phi(p, PredictorConfig{1, 2, 256}, Vector{{1.0, 1.0}}, hist, 0.0);
    CHECK((w - v).norm() == 0.0);
}

TEST_CASE("matches the hand-expanded two-stage formula on 100 random draws") {
    const auto p = example4();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    std::uniform_int_distribution<int> nseg(1, 8);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        Vector z{{U(rng), U(rng)}};
        if (z.norm() > 5.0) z *= 5.0 / z.norm();
        // ZOH input on a holding grid of 0.01 inside [0, 0.5).
        std::vector<ZohSegment> segs{{0.0, U(rng)}};
        const int extra = nseg(rng);
        std::uniform_int_distribution<int> slot(1, 49);
        std::vector<int> slots;
        for (int j = 0; j < extra; ++j) slots.push_back(slot(rng));
        std::sort(slots.begin(), slots.end());
        slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
        for (int s : slots) segs.push_back({0.01 * s, U(rng)});
        const ZohSignal u(segs, 0.5);
        const Vector expect = two_stage_closed_form(z, manual_integral(u, 0.0, 0.25), manual_integral(u, 0.25, 0.5));
        const Vector got = predict(p, PredictorConfig{1, 2, 256}, z, u);
        worst = std::max(worst, (got - expect).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-13);
}

TEST_CASE("growth bound holds with the estimated K") {
    const auto p = example4();
    const PredictorConfig cfg{1, 2, 256};
    const double K = estimate_K(p, cfg, 20, 0).k_hat;
    const DerivedConstants dc = derived_constants(p, 1.0, Vector{{-3.0, -3.0}}, cfg, K);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (int k = 0; k < 200; ++k) {
        const Vector z{{U(rng), U(rng)}};
        const ZohSignal u({{-0.5, U(rng)}, {-0.3, U(rng)}, {-0.1, U(rng)}}, 0.0);
        const Vector v = phi(p, cfg, z, u, 0.0);
        CHECK(v.norm() <= dc.Gamma * (z.norm() + u.sup_abs()) * (1.0 + 1e-9));
    }
}

TEST_CASE("error bound structure") {
    const auto p = example4();
    CHECK(prop21_bound(p, PredictorConfig{3, 2, 256}, 1.0, 0.0, 0.0) == 0.0);
    const double rho = PredictorConfig{1, 2, 256}.contraction(p);
    for (int l = 1; l < 8; ++l) {
        const double a = prop21_bound(p, PredictorConfig{l, 2, 256}, 0.5, 2.0, 1.0);
        const double b = prop21_bound(p, PredictorConfig{l + 1, 2, 256}, 0.5, 2.0, 1.0);
        CHECK(b / a == doctest::Approx(rho).epsilon(1e-13));
    }
}

TEST_CASE("homogeneity on a drift-free chain") {
    const auto p = integrator2();
    const PredictorConfig cfg{3, 2, 128};
    const Vector z{{0.7, -1.3}};
    const ZohSignal u({{-0.5, 1.0}, {-0.2, -2.0}}, 0.0);
    const ZohSignal u3({{-0.5, 3.0}, {-0.2, -6.0}}, 0.0);
    const Vector a = phi(p, cfg, z, u, 0.0);
    const Vector b = phi(p, cfg, 3.0 * z, u3, 0.0);
    CHECK((b - 3.0 * a).norm() <= 1e-13);
}

TEST_CASE("estimate_K") {
    const auto p = example4();
    const PredictorConfig cfg{1, 2, 256};
    const KEstimate par = estimate_K(p, cfg, 12, 7);
    const KEstimate ser = estimate_K_serial(p, cfg, 12, 7);
    CHECK(par == ser);
    CHECK(par.per_l.size() == kKEstimateMaxL);
    CHECK(par.k_hat == *std::max_element(par.per_l.begin(), par.per_l.end()));
    CHECK(par.draws_used <= 12);
    CHECK(par.k_hat > 0.0);
    CHECK(std::isfinite(par.k_hat));

    const KEstimate lin = estimate_K(linear2(), cfg, 12, 7);
    CHECK(std::isfinite(lin.k_hat));
    CHECK(lin.k_hat > 0.0);
}

TEST_CASE("frozen K estimate for the shipped configuration") {
    const KEstimate k = estimate_K(example4(), PredictorConfig{1, 2, 256}, 50, 0);
    CHECK(k.k_hat == doctest::Approx(0.03671252981952105).epsilon(1e-12));
    CHECK(k.draws_used == 50);
}

TEST_CASE("exact LTI predictor") {
    const LtiPlant zero_a = [] {
        LtiPlant p = scalar_lti(0.0);
        return p;
    }();
    const ZohSignal u({{-0.5, 2.0}, {-0.25, -1.0}}, 0.0);
    CHECK(lti_predict(zero_a, Vector{{1.5}}, u, 0.0)(0) == doctest::Approx(1.5 + 0.5 - 0.25).epsilon(1e-15));

    const LtiPlant two = lti();
    const Vector z{{0.3, -0.7}};
    const Vector free = lti_predict(two, z, ZohSignal::constant(-0.5, 0.0, 0.0), 0.0);
    CHECK((free - expm(two.A * 0.5) * z).norm() <= 1e-14);

    const Vector s = lti_predict(scalar_lti(1.0), Vector{{0.0}}, ZohSignal::constant(-0.5, 0.0, 1.0), 0.0);
    CHECK(s(0) == doctest::Approx(0.64872127070012815).epsilon(1e-14));
}

TEST_CASE("geometric convergence in l") {
    for (const auto& p : {example4(), linear2()}) {
        const ConvergenceCurve c = predictor_convergence_study(p, 2, 1, 6, 50, 0);
        for (std::size_t i = 1; i < c.max_error.size(); ++i) CHECK(c.max_error[i] < c.max_error[i - 1]);
        CHECK(c.fitted_ratio <= c.rho + 0.1);
    }
}

TEST_CASE("drift-free single integrator is exact at l = 1") {
    const ConvergenceCurve c = predictor_convergence_study(single_integrator(), 2, 1, 6, 10, 0, 256);
    for (double e : c.max_error) CHECK(e <= 1e-12);
}

}
