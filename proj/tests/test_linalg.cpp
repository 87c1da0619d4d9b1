#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "bpod/linalg.hpp"

using namespace bpod;
using namespace bpod::linalg;

namespace {

MatrixXcd random_complex(Index n, Index m, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    MatrixXcd M(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) M(i, j) = cdouble(dist(rng), dist(rng));
    return M;
}

MatrixXcd random_stable(Index n, std::mt19937_64& rng) {
    MatrixXcd A = random_complex(n, n, rng);
    A -= (A.eigenvalues().real().maxCoeff() + 0.5) * MatrixXcd::Identity(n, n);
    return A;
}

}  // namespace

TEST_CASE("sylvester solve residual") {
    std::mt19937_64 rng(11);
    const Index n = 20, m = 13;
    MatrixXcd A = random_stable(n, rng);
    MatrixXcd B = random_stable(m, rng);
    MatrixXcd C = random_complex(n, m, rng);
    MatrixXcd X = solve_sylvester(A, B, C);
    CHECK((A * X + X * B - C).norm() / C.norm() <= 1e-11);
}

TEST_CASE("lyapunov solve residual and hermitian result") {
    std::mt19937_64 rng(17);
    const Index n = 30;
    MatrixXcd A = random_stable(n, rng);
    MatrixXcd Bmat = random_complex(n, 2, rng);
    MatrixXcd Q = Bmat * Bmat.adjoint();
    MatrixXcd X = solve_lyapunov(A, Q);
    CHECK(lyapunov_residual(A, X, Q) / Q.norm() <= 1e-11);
    CHECK((X - X.adjoint()).norm() <= 1e-12 * X.norm());
}

TEST_CASE("lyapunov rejects marginally stable pairs") {
    MatrixXcd A = MatrixXcd::Zero(2, 2);
    A(0, 0) = cdouble(0.0, 1.0);  // purely imaginary eigenvalue
    A(1, 1) = cdouble(-1.0, 0.0);
    MatrixXcd Q = MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(solve_lyapunov(A, Q), NumericalError);
}

TEST_CASE("psd factor reproduces the matrix") {
    std::mt19937_64 rng(23);
    MatrixXcd R = random_complex(12, 8, rng);
    MatrixXcd W = R * R.adjoint();  // rank 8 PSD
    MatrixXcd L = psd_factor(W);
    CHECK((L * L.adjoint() - W).norm() <= 1e-11 * W.norm());
}

TEST_CASE("eig propagator matches the taylor series for small times") {
    std::mt19937_64 rng(5);
    const Index n = 8;
    MatrixXcd A = random_stable(n, rng);
    EigPropagator prop(A);
    const double t = 1e-3;
    MatrixXcd expm = prop.propagator(t);
    MatrixXcd A2 = A * A;
    MatrixXcd taylor = MatrixXcd::Identity(n, n) + t * A + 0.5 * t * t * A2 +
                       t * t * t / 6.0 * A2 * A + t * t * t * t / 24.0 * A2 * A2;
    CHECK((expm - taylor).norm() <= 1e-10);
    CHECK((prop.propagator(0.0) - MatrixXcd::Identity(n, n)).norm() <= 1e-12);
}

TEST_CASE("eig propagator semigroup property") {
    std::mt19937_64 rng(7);
    MatrixXcd A = random_stable(10, rng);
    EigPropagator prop(A);
    MatrixXcd lhs = prop.propagator(0.7) * prop.propagator(0.3);
    MatrixXcd rhs = prop.propagator(1.0);
    CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("golden section finds the maximum of a unimodal function") {
    auto f = [](double x) { return -(x - 1.7) * (x - 1.7); };
    const double x = golden_section_max(f, 0.0, 5.0, 1e-10);
    CHECK(x == doctest::Approx(1.7).epsilon(1e-7));
}
