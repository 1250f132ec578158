#include "predictorlab/linalg.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "predictorlab/errors.hpp"

namespace predictorlab {

Matrix expm(const Matrix& M) {
    if (M.rows() != M.cols()) throw InvalidArgument("expm: square matrix required");
    if (!M.allFinite()) throw InvalidArgument("expm: non-finite entries");
    return M.exp();
}

HurwitzResult check_hurwitz(const Matrix& M) {
    if (M.rows() != M.cols() || M.rows() == 0) throw InvalidArgument("check_hurwitz: square matrix required");
    if (!M.allFinite()) throw InvalidArgument("check_hurwitz: non-finite entries");
    Eigen::EigenSolver<Matrix> es(M, false);
    const double abscissa = es.eigenvalues().real().maxCoeff();
    return {abscissa < 0.0, abscissa};
}

Matrix solve_lyapunov(const Matrix& M, double rhs_scale) {
    if (!(rhs_scale > 0.0)) throw InvalidArgument("solve_lyapunov: scale must be positive");
    if (!check_hurwitz(M).is_hurwitz) throw NoSolution("solve_lyapunov: matrix is not Hurwitz");
    const auto n = M.rows();
    const Matrix I = Matrix::Identity(n, n);
    // vec(Q M) = (M' kron I) vec(Q), vec(M' Q) = (I kron M') vec(Q)
    Matrix K = Matrix::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            K.block(i * n, j * n, n, n) += M(j, i) * I;
            if (i == j) K.block(i * n, j * n, n, n) += M.transpose();
        }
    }
    const Vector rhs = (-2.0 * rhs_scale * I).reshaped();
    const Vector q = K.fullPivLu().solve(rhs);
    Matrix Q = q.reshaped(n, n);
    Q = 0.5 * (Q + Q.transpose()).eval();
    if (!(min_eigenvalue(Q) > 0.0)) throw NoSolution("solve_lyapunov: solution is not positive definite");
    return Q;
}

double spectral_norm(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace predictorlab
