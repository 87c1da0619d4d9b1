#include "bpod/linalg.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace bpod::linalg {

namespace {

void check_schur(const Eigen::ComplexSchur<MatrixXcd>& schur, const char* who) {
    if (schur.info() != Eigen::Success) {
        throw NumericalError(std::string(who) + ": Schur factorization failed");
    }
}

}  // namespace

MatrixXcd solve_sylvester(const MatrixXcd& A, const MatrixXcd& B, const MatrixXcd& C) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || C.rows() != A.rows() ||
        C.cols() != B.rows()) {
        throw DimensionMismatch("solve_sylvester: incompatible shapes");
    }
    Eigen::ComplexSchur<MatrixXcd> sa(A), sb(B);
    check_schur(sa, "solve_sylvester(A)");
    check_schur(sb, "solve_sylvester(B)");
    const MatrixXcd& Ta = sa.matrixT();
    const MatrixXcd& Tb = sb.matrixT();

    MatrixXcd F = sa.matrixU().adjoint() * C * sb.matrixU();
    const Index n = A.rows();
    const Index m = B.rows();
    const double scale = A.norm() + B.norm();

    MatrixXcd X(n, m);
    MatrixXcd T = Ta;
    for (Index j = 0; j < m; ++j) {
        VectorXcd rhs = F.col(j);
        if (j > 0) rhs.noalias() -= X.leftCols(j) * Tb.block(0, j, j, 1);
        T.diagonal() = Ta.diagonal().array() + Tb(j, j);
        for (Index i = 0; i < n; ++i) {
            if (std::abs(T(i, i)) < 1e-14 * scale) {
                throw NumericalError(
                    "solve_sylvester: eigenvalue sum near zero, solution not unique");
            }
        }
        X.col(j) = T.triangularView<Eigen::Upper>().solve(rhs);
    }
    return sa.matrixU() * X * sb.matrixU().adjoint();
}

MatrixXcd solve_lyapunov(const MatrixXcd& A, const MatrixXcd& Q) {
    if (A.rows() != A.cols() || Q.rows() != Q.cols() || A.rows() != Q.rows()) {
        throw DimensionMismatch("solve_lyapunov: A and Q must be square of equal size");
    }
    Eigen::ComplexSchur<MatrixXcd> schur(A);
    check_schur(schur, "solve_lyapunov");
    const MatrixXcd& T = schur.matrixT();
    const MatrixXcd& U = schur.matrixU();

    MatrixXcd F = -(U.adjoint() * Q * U);
    const Index n = A.rows();
    const double scale = 2.0 * A.norm();

    // T X + X T^H = F with T upper triangular: sweep columns right to left.
    MatrixXcd X(n, n);
    MatrixXcd Tj = T;
    for (Index j = n - 1; j >= 0; --j) {
        VectorXcd rhs = F.col(j);
        const Index tail = n - 1 - j;
        if (tail > 0)
            rhs.noalias() -= X.rightCols(tail) * T.row(j).tail(tail).adjoint();
        Tj.diagonal() = T.diagonal().array() + std::conj(T(j, j));
        for (Index i = 0; i < n; ++i) {
            if (std::abs(Tj(i, i)) < 1e-14 * scale) {
                throw NumericalError(
                    "solve_lyapunov: eigenvalue pair sum near zero (marginally stable A?)");
            }
        }
        X.col(j) = Tj.triangularView<Eigen::Upper>().solve(rhs);
    }
    MatrixXcd W = U * X * U.adjoint();
    return 0.5 * (W + W.adjoint());
}

double lyapunov_residual(const MatrixXcd& A, const MatrixXcd& X, const MatrixXcd& Q) {
    return (A * X + X * A.adjoint() + Q).norm();
}

namespace {

template <typename Mat>
Mat psd_factor_impl(const Mat& W, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<Mat> es(W);
    if (es.info() != Eigen::Success) {
        throw NumericalError("psd_factor: eigendecomposition failed");
    }
    VectorXd lam = es.eigenvalues();
    const double lmax = lam.size() ? lam.maxCoeff() : 0.0;
    VectorXd root = VectorXd::Zero(lam.size());
    for (Index i = 0; i < lam.size(); ++i) {
        if (lam[i] > rel_tol * lmax && lam[i] > 0.0) root[i] = std::sqrt(lam[i]);
    }
    return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

MatrixXcd psd_factor(const MatrixXcd& W, double rel_tol) {
    return psd_factor_impl(W, rel_tol);
}

MatrixXd psd_factor(const MatrixXd& W, double rel_tol) {
    return psd_factor_impl(W, rel_tol);
}

EigPropagator::EigPropagator(const MatrixXcd& A) {
    Eigen::ComplexEigenSolver<MatrixXcd> ces(A);
    if (ces.info() != Eigen::Success) {
        throw NumericalError("EigPropagator: eigendecomposition failed");
    }
    lambda_ = ces.eigenvalues();
    vectors_ = ces.eigenvectors();
    Eigen::PartialPivLU<MatrixXcd> lu(vectors_);
    inverse_vectors_ = lu.solve(MatrixXcd::Identity(A.rows(), A.cols()));
}

double EigPropagator::max_real_part() const {
    return lambda_.real().maxCoeff();
}

MatrixXcd EigPropagator::propagator(double t) const {
    return apply(t, MatrixXcd::Identity(lambda_.size(), lambda_.size()));
}

MatrixXcd EigPropagator::apply(double t, const MatrixXcd& X) const {
    VectorXcd phase = (lambda_ * t).array().exp();
    return vectors_ * (phase.asDiagonal() * (inverse_vectors_ * X));
}

double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace bpod::linalg
