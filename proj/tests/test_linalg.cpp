#include <doctest.h>

#include <cmath>
#include <random>

#include "predictorlab/errors.hpp"
#include "predictorlab/linalg.hpp"

using namespace predictorlab;

TEST_SUITE("linalg") {

TEST_CASE("matrix exponential") {
    CHECK((expm(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm() == 0.0);
    CHECK(expm(Matrix{{1.0}})(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    // Rotation generator.
    const Matrix R = expm(Matrix{{0.0, -1.0}, {1.0, 0.0}});
    CHECK(R(0, 0) == doctest::Approx(std::cos(1.0)).epsilon(1e-14));
    CHECK(R(1, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-14));
    // Nilpotent.
    const Matrix N = expm(Matrix{{0.0, 2.0}, {0.0, 0.0}});
    CHECK(N(0, 1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("hurwitz checks") {
    const Matrix obs{{-3.0, 1.0}, {-3.0, 0.0}};
    const auto r = check_hurwitz(obs);
    CHECK(r.is_hurwitz);
    CHECK(r.spectral_abscissa == doctest::Approx(-1.5).epsilon(1e-14));
    const auto f = check_hurwitz(Matrix{{0.0, 1.0}, {-15.0, -8.0}});
    CHECK(f.is_hurwitz);
    CHECK(f.spectral_abscissa == doctest::Approx(-3.0).epsilon(1e-13));
    const auto z = check_hurwitz(Matrix::Zero(2, 2));
    CHECK_FALSE(z.is_hurwitz);
    CHECK(z.spectral_abscissa == 0.0);
}

TEST_CASE("lyapunov solutions") {
    CHECK((solve_lyapunov(-Matrix::Identity(3, 3), 1.0) - Matrix::Identity(3, 3)).norm() <= 1e-14);
    CHECK(solve_lyapunov(Matrix{{-3.0}}, 1.0)(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const Matrix M{{-3.0, 1.0}, {-3.0, 0.0}};
    const Matrix Q = solve_lyapunov(M, 1.0);
    CHECK((Q * M + M.transpose() * Q + 2.0 * Matrix::Identity(2, 2)).norm() <= 1e-10);
    CHECK((Q - Q.transpose()).norm() == 0.0);
    CHECK(min_eigenvalue(Q) > 0.0);
    CHECK_THROWS_AS(solve_lyapunov(Matrix::Zero(2, 2), 1.0), NoSolution);
}

TEST_CASE("lyapunov residual on random hurwitz matrices") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int k = 0; k < 30; ++k) {
        const int n = 2 + k % 4;
        Matrix M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) = N(rng);
        // Shift left of the spectrum.
        M -= (check_hurwitz(M).spectral_abscissa + 0.5) * Matrix::Identity(n, n);
        const Matrix Q = solve_lyapunov(M, 2.0);
        CHECK((Q * M + M.transpose() * Q + 4.0 * Matrix::Identity(n, n)).norm() <= 1e-9 * Q.norm());
        CHECK(min_eigenvalue(Q) > 0.0);
    }
}

TEST_CASE("norms and eigenvalues") {
    CHECK(spectral_norm(Matrix{{3.0, 0.0}, {0.0, -4.0}}) == doctest::Approx(4.0));
    const Matrix S{{2.0, 1.0}, {1.0, 2.0}};
    CHECK(min_eigenvalue(S) == doctest::Approx(1.0));
    CHECK(max_eigenvalue(S) == doctest::Approx(3.0));
}

}
