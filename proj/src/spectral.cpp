#include "bpod/spectral.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace bpod::spectral {

namespace {
constexpr double kPi = std::numbers::pi;
}

Grid1D chebyshev_grid(int N) {
    if (N < 2 || N % 2 != 0) {
        throw InvalidParameter("chebyshev_grid: N must be even and >= 2, got " +
                               std::to_string(N));
    }
    Grid1D grid;
    grid.n_points = N + 1;
    grid.points.resize(N + 1);
    // y_j = cos(pi j / N), evaluated through the sine form for symmetry and
    // mirrored so that points[j] == -points[N-j] holds exactly.
    for (int j = 0; j <= N / 2; ++j) {
        const double y = std::sin(kPi * (N - 2 * j) / (2.0 * N));
        grid.points[j] = y;
        grid.points[N - j] = -y;
    }
    grid.points[N / 2] = 0.0;
    return grid;
}

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Weideman-Reddy recursion with the trig-identity differences, the flipping
// trick and the negative-sum trick, carried in extended precision so that the
// fourth-derivative matrix keeps ~1e-9 absolute accuracy up to N ~ 128.
std::array<MatrixXld, 4> derivative_matrices_ld(int n) {
    const int N = n - 1;
    const long double pi = 3.14159265358979323846264338327950288L;

    Eigen::Matrix<long double, Eigen::Dynamic, 1> theta(n);
    for (int j = 0; j < n; ++j) theta[j] = pi * j / N;

    // Pairwise differences x_i - x_j; the lower half mirrors the upper half
    // through the node antisymmetry to avoid sin evaluations near pi.
    MatrixXld dx = MatrixXld::Ones(n, n);
    const int n_half = (n + 1) / 2;
    for (int i = 0; i < n_half; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                dx(i, j) = 2.0L * std::sin(0.5L * (theta[i] + theta[j])) *
                           std::sin(0.5L * (theta[j] - theta[i]));
    for (int i = n_half; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) dx(i, j) = -dx(n - 1 - i, n - 1 - j);

    Eigen::Matrix<long double, Eigen::Dynamic, 1> c(n);
    for (int i = 0; i < n; ++i)
        c[i] = ((i == 0 || i == N) ? 2.0L : 1.0L) * ((i % 2) ? -1.0L : 1.0L);

    MatrixXld Z = MatrixXld::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) Z(i, j) = 1.0L / dx(i, j);

    std::array<MatrixXld, 4> d;
    MatrixXld prev = MatrixXld::Identity(n, n);
    for (int ell = 1; ell <= 4; ++ell) {
        MatrixXld D = MatrixXld::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            long double row_sum = 0.0L;
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const long double cij = c[i] / c[j];
                long double v;
                if (ell == 1) {
                    v = cij * Z(i, j);
                } else {
                    v = ell * Z(i, j) * (cij * prev(i, i) - prev(i, j));
                }
                D(i, j) = v;
                row_sum += v;
            }
            D(i, i) = -row_sum;  // negative-sum trick
        }
        d[ell - 1] = D;
        prev = D;
    }
    return d;
}

}  // namespace

std::array<MatrixXd, 4> derivative_matrices(const Grid1D& grid) {
    const auto d_ld = derivative_matrices_ld(grid.n_points);
    std::array<MatrixXd, 4> d;
    for (int k = 0; k < 4; ++k) d[k] = d_ld[k].cast<double>();
    return d;
}

DiffOperator diff_matrix(const Grid1D& grid, int order, BoundaryTreatment boundary) {
    if (order != 1 && order != 2 && order != 4) {
        throw InvalidParameter("diff_matrix: unsupported order " + std::to_string(order));
    }
    if (boundary == BoundaryTreatment::clamped && order != 4) {
        throw InvalidParameter("diff_matrix: clamped treatment is only defined for order 4");
    }

    DiffOperator op;
    op.order = order;
    op.boundary = boundary;

    if (boundary == BoundaryTreatment::none) {
        op.matrix = derivative_matrices(grid)[order - 1];
        return op;
    }

    // Fourth derivative for v with v(+-1) = v'(+-1) = 0.  Writing
    // v = (1 - y^2) p with p(+-1) = 0 gives
    //   v'''' = (1 - y^2) p'''' - 8 y p''' - 12 p'',
    // where the interior nodal values of p are v_j / (1 - y_j^2).
    const int n = grid.n_points;
    const int ni = grid.interior_count();
    const auto d_ld = derivative_matrices_ld(n);

    Eigen::Matrix<long double, Eigen::Dynamic, 1> y(n), s(n), one_my2(n);
    for (int j = 0; j < n; ++j) y[j] = static_cast<long double>(grid.points[j]);
    s.setZero();
    for (int j = 1; j < n - 1; ++j) s[j] = 1.0L / (1.0L - y[j] * y[j]);
    for (int j = 0; j < n; ++j) one_my2[j] = 1.0L - y[j] * y[j];

    MatrixXld full = one_my2.asDiagonal() * d_ld[3] - 8.0L * y.asDiagonal() * d_ld[2] -
                     12.0L * d_ld[1];
    full = full * s.asDiagonal();
    op.matrix = full.block(1, 1, ni, ni).cast<double>();
    return op;
}

Quadrature quadrature_weights(const Grid1D& grid) {
    const int N = grid.order();
    Quadrature q;
    q.weights.resize(N + 1);

    // Clenshaw-Curtis on the Gauss-Lobatto nodes (even N by construction).
    q.weights[0] = 1.0 / (double(N) * N - 1.0);
    q.weights[N] = q.weights[0];
    for (int j = 1; j < N; ++j) {
        const double th = kPi * j / N;
        double v = 1.0;
        for (int k = 1; k <= N / 2 - 1; ++k)
            v -= 2.0 * std::cos(2.0 * k * th) / (4.0 * k * k - 1.0);
        v -= std::cos(N * th) / (double(N) * N - 1.0);
        q.weights[j] = 2.0 * v / N;
    }
    // Enforce the node symmetry of the rule exactly.
    for (int j = 0; j <= N / 2; ++j) {
        const double w = 0.5 * (q.weights[j] + q.weights[N - j]);
        q.weights[j] = w;
        q.weights[N - j] = w;
    }
    return q;
}

}  // namespace bpod::spectral
