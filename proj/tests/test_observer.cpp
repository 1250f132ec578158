#include <doctest.h>

#include "predictorlab/errors.hpp"
#include "predictorlab/observer.hpp"
#include "support.hpp"

using namespace predictorlab;
using namespace testsupport;

TEST_SUITE("observer") {

TEST_CASE("gain construction") {
    const auto p = example4();
    const ObserverGains g(p, Vector{{-3.0, -3.0}}, 2.0);
    CHECK(g.scaled()(0) == -6.0);
    CHECK(g.scaled()(1) == -12.0);
    CHECK_THROWS_AS(ObserverGains(p, Vector{{3.0, 3.0}}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(ObserverGains(p, Vector{{-3.0, -3.0}}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(ObserverGains(p, Vector{{-3.0}}, 1.0), InvalidArgument);
}

TEST_CASE("observer flow") {
    const auto p = example4();
    const ObserverGains g(p, Vector{{-3.0, -3.0}}, 1.0);
    const auto zero = observer_rhs(p, g, {Vector::Zero(2), 0.0}, 0.0);
    CHECK(zero.dz.norm() == 0.0);
    CHECK(zero.dw == 0.0);

    const double ul = 0.4;
    const auto d = observer_rhs(p, g, {Vector{{1.0, 0.0}}, 0.0}, ul);
    CHECK(d.dz(0) == doctest::Approx(0.70710678118654752 - 3.0).epsilon(1e-15));
    CHECK(d.dz(1) == doctest::Approx(-3.0 + ul).epsilon(1e-15));
    CHECK(d.dw == doctest::Approx(0.70710678118654752).epsilon(1e-15));

    // Zero innovation: injection vanishes.
    const Vector z{{0.8, -0.3}};
    const auto e = observer_rhs(p, g, {z, z(0)}, ul);
    const Vector drift_only = delay_free_rhs(p, z, ul);
    CHECK((e.dz - drift_only).norm() == 0.0);
}

TEST_CASE("measurement jump") {
    const ObserverState s{Vector{{1.0, 2.0}}, 5.0};
    const ObserverState j = observer_jump(s, 1.25);
    CHECK(j.w == 1.25);
    CHECK((j.z - s.z).norm() == 0.0);
    const ObserverState same = observer_jump(s, 5.0);
    CHECK(same.w == s.w);
}

TEST_CASE("linear observer flow") {
    LtiPlant p;
    p.name = "chain";
    p.A = Matrix::Zero(2, 2);
    p.B = Vector{{0.0, 1.0}};
    p.G = Matrix::Identity(2, 2);
    p.c = Vector{{1.0, 0.0}};
    p.r = 0.1;
    p.tau = 0.1;
    const auto d = lti_observer_rhs(p, Vector{{-1.0, -1.0}}, {Vector{{1.0, 0.0}}, 0.0}, 0.0);
    CHECK(d.dz(0) == -1.0);
    CHECK(d.dz(1) == -1.0);
    CHECK(d.dw == 0.0);
    CHECK(lti_observer_rhs(p, Vector{{-1.0, -1.0}}, {Vector::Zero(2), 0.0}, 0.0).dz.norm() == 0.0);

    const LtiPlant q = lti();
    const Vector z{{0.4, -0.2}};
    const auto e = lti_observer_rhs(q, Vector{{-3.0, -3.0}}, {z, q.c.dot(z)}, 0.7);
    CHECK((e.dz - (q.A * z + q.B * 0.7)).norm() == 0.0);
}

TEST_CASE("observer bound on the zero trajectory") {
    SimConfig c = nominal();
    c.x0 = Vector::Zero(2);
    c.u0 = {{-0.5, 0.0}};
    c.t_end = 2.0;
    const SimTrace tr = run_closed_loop(c);
    const auto p = example4();
    const DerivedConstants dc = derived_constants(p, 1.0, c.p, c.predictor, 0.0);
    const BoundSeries s = observer_bound_monitor(tr, dc, c.T1, 0.0);
    CHECK(s.min_margin >= 0.0);
    for (std::size_t i = 0; i < s.margins.size(); ++i) CHECK(s.margins[i] == s.rhs[i]);
}

TEST_CASE("observer error decays on the nominal run") {
    const SimTrace tr = run_closed_loop(nominal());
    // Least-squares fit of log |z - x(t - r)| over [5, 40].
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : tr.rows) {
        if (row.t < 5.0) continue;
        const double e = (row.z - tr.state_at(row.t - tr.r)).norm();
        if (!(e > 0.0)) continue;
        const double y = std::log(e);
        n += 1;
        sx += row.t;
        sy += y;
        sxx += row.t * row.t;
        sxy += row.t * y;
    }
    REQUIRE(n > 100);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope < 0.0);
}

TEST_CASE("zero-error fixed point") {
    // z starts on x(t - r), w on x1(t - r), no disturbance: the error stays at
    // integrator level. The constant initial history must solve the open loop,
    // so x2 = -f(x1) with zero input.
    SimConfig c = nominal();
    c.x0 = Vector{{1.0, -drift(1.0)}};
    c.u0 = {{-0.5, 0.0}};
    c.z0 = c.x0;
    c.w0 = c.x0(0);
    c.t_end = 5.0;
    const SimTrace tr = run_closed_loop(c);
    double worst = 0.0;
    for (const auto& row : tr.rows) worst = std::max(worst, (row.z - tr.state_at(row.t - tr.r)).norm());
    CHECK(worst <= 1e-8);
}

}
