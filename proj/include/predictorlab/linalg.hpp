#pragma once

#include "predictorlab/signals.hpp"

namespace predictorlab {

// Padé scaling-and-squaring matrix exponential.
Matrix expm(const Matrix& M);

struct HurwitzResult {
    bool is_hurwitz;
    double spectral_abscissa;  // max real part of the eigenvalues
};

HurwitzResult check_hurwitz(const Matrix& M);

// Solves Q M + M' Q = -2 scale I for Hurwitz M through the Kronecker
// vectorization (desk-scale n <= 10). The result is symmetric positive
// definite; throws NoSolution when M is not Hurwitz.
Matrix solve_lyapunov(const Matrix& M, double rhs_scale);

double spectral_norm(const Matrix& M);
double min_eigenvalue(const Matrix& S);  // symmetric S
double max_eigenvalue(const Matrix& S);  // symmetric S

}  // namespace predictorlab
