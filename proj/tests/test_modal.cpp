#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "bpod/dynamics.hpp"
#include "bpod/modal.hpp"

using namespace bpod;
using namespace bpod::modal;

namespace {

MatrixXcd random_snapshots(Index n, Index m, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    MatrixXcd X(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) X(i, j) = cdouble(dist(rng), dist(rng));
    return X;
}

MatrixXd random_spd(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    MatrixXd R(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) R(i, j) = dist(rng);
    return R.transpose() * R + MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("single snapshot gives the normalized snapshot") {
    std::mt19937_64 rng(1);
    MatrixXcd x = random_snapshots(12, 1, rng);
    DenseWeight<cdouble> W(random_spd(12, rng));

    auto basis = pod<cdouble>(x, W);
    REQUIRE(basis.rank() == 1);
    const double norm_w = std::sqrt(std::real(W.inner(x.col(0), x.col(0))));
    CHECK(basis.values[0] == doctest::Approx(norm_w * norm_w).epsilon(1e-12));
    // mode equals x up to phase
    const cdouble phase = basis.modes.col(0).dot(x.col(0)) /
                          std::abs(basis.modes.col(0).dot(x.col(0)));
    CHECK((basis.modes.col(0) * phase * norm_w - x.col(0)).norm() <= 1e-10 * norm_w);
}

TEST_CASE("modes are W-orthonormal and eigenvalues account for the energy") {
    std::mt19937_64 rng(2);
    MatrixXcd X = random_snapshots(20, 8, rng);
    DenseWeight<cdouble> W(random_spd(20, rng));

    auto basis = pod<cdouble>(X, W);
    MatrixXcd gram = basis.modes.adjoint() * W.apply(basis.modes);
    CHECK((gram - MatrixXcd::Identity(basis.rank(), basis.rank())).norm() <= 1e-8);

    const double trace = std::real((X.adjoint() * W.apply(X)).trace());
    CHECK(std::abs(basis.values.sum() - trace) <= 1e-10 * trace);
    CHECK(basis.total_energy == doctest::Approx(trace).epsilon(1e-12));

    for (Index j = 1; j < basis.values.size(); ++j)
        CHECK(basis.values[j] <= basis.values[j - 1]);
}

TEST_CASE("pod reports rank deficiency") {
    std::mt19937_64 rng(3);
    MatrixXcd X = random_snapshots(16, 3, rng);
    MatrixXcd Xdup(16, 6);
    Xdup << X, X;  // rank 3 data in 6 columns
    IdentityWeight<cdouble> W(16);

    auto basis = pod<cdouble>(Xdup, W, 5);
    CHECK(basis.rank() == 3);
    CHECK(basis.rank_truncated);
    CHECK_FALSE(basis.warnings.empty());
}

TEST_CASE("pod minimizes reconstruction error over random subspaces") {
    std::mt19937_64 rng(12345);
    const Index n = 24, m = 10;
    MatrixXcd X = random_snapshots(n, m, rng);
    // skew the spectrum so POD has something to prefer
    for (Index j = 0; j < m; ++j) X.col(j) *= std::pow(0.7, double(j));
    DenseWeight<cdouble> W(random_spd(n, rng));

    auto basis = pod<cdouble>(X, W);
    auto recon_error = [&](const MatrixXcd& Q) {
        // Q W-orthonormal; error = sum_j || x_j - Q Q^H W x_j ||_W^2
        MatrixXcd resid = X - Q * (W.apply(Q).adjoint() * X);
        return std::real((resid.adjoint() * W.apply(resid)).trace());
    };

    for (int r : {1, 2, 4}) {
        const double pod_err = recon_error(basis.modes.leftCols(r));
        for (int trial = 0; trial < 20; ++trial) {
            // random r-dimensional subspace of the snapshot span
            MatrixXcd C = random_snapshots(m, r, rng);
            MatrixXcd V = X * C;
            // W-orthonormalize
            MatrixXcd G = V.adjoint() * W.apply(V);
            Eigen::LLT<MatrixXcd> llt(G);
            MatrixXcd R = llt.matrixL().adjoint();
            MatrixXcd Q = R.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(V);
            CHECK(pod_err <= recon_error(Q) * (1.0 + 1e-10));
        }
    }
}

TEST_CASE("output projection is an idempotent parseval map") {
    std::mt19937_64 rng(6);
    const Index n = 18;
    MatrixXcd X = random_snapshots(n, 9, rng);
    DenseWeight<cdouble> W(random_spd(n, rng));
    auto basis = pod<cdouble>(X, W);

    const int s = 4;
    auto proj = output_projection<cdouble>(basis, W, s);
    CHECK(proj.rank() == s);

    // P^2 = P
    MatrixXcd Y = random_snapshots(n, 5, rng);
    CHECK((proj.project(proj.project(Y)) - proj.project(Y)).norm() <=
          1e-10 * proj.project(Y).norm());

    // Parseval: |y_hat|_2 = ||P y||_W
    for (Index j = 0; j < Y.cols(); ++j) {
        const VectorXcd yhat = proj.map * Y.col(j);
        const MatrixXcd py = proj.project(MatrixXcd(Y.col(j)));
        const double norm_w = std::sqrt(std::real(
            (py.adjoint() * W.apply(py))(0, 0)));
        CHECK(yhat.norm() == doctest::Approx(norm_w).epsilon(1e-10));
    }

    CHECK_THROWS_AS(output_projection<cdouble>(basis, W, int(basis.rank()) + 1),
                    InvalidParameter);
}

TEST_CASE("real-scalar instantiation works the same way") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    MatrixXd X(15, 6);
    for (Index i = 0; i < 15; ++i)
        for (Index j = 0; j < 6; ++j) X(i, j) = dist(rng);
    DenseWeight<double> W(random_spd(15, rng));

    auto basis = pod<double>(X, W);
    MatrixXd gram = basis.modes.transpose() * W.apply(basis.modes);
    CHECK((gram - MatrixXd::Identity(basis.rank(), basis.rank())).norm() <= 1e-8);
}
