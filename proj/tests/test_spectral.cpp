#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bpod/spectral.hpp"

using namespace bpod;
using namespace bpod::spectral;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("chebyshev grid nodes") {
    const Grid1D g2 = chebyshev_grid(2);
    CHECK(g2.n_points == 3);
    CHECK(g2.points[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g2.points[1] == 0.0);
    CHECK(g2.points[2] == doctest::Approx(-1.0).epsilon(1e-15));

    const Grid1D g4 = chebyshev_grid(4);
    CHECK(g4.points[1] == doctest::Approx(std::cos(pi / 4)).epsilon(1e-14));

    const Grid1D g64 = chebyshev_grid(64);
    CHECK(g64.n_points == 65);
    for (int j = 1; j < g64.n_points; ++j) CHECK(g64.points[j] < g64.points[j - 1]);
    CHECK(g64.points[0] == 1.0);
    CHECK(g64.points[64] == -1.0);
    // exact mirror symmetry
    for (int j = 0; j <= 64; ++j) CHECK(g64.points[j] == -g64.points[64 - j]);
}

TEST_CASE("chebyshev grid rejects bad N") {
    CHECK_THROWS_AS(chebyshev_grid(3), InvalidParameter);
    CHECK_THROWS_AS(chebyshev_grid(0), InvalidParameter);
    CHECK_THROWS_AS(chebyshev_grid(-4), InvalidParameter);
    CHECK_THROWS_AS(chebyshev_grid(7), InvalidParameter);
}

TEST_CASE("first derivative on constants and linears") {
    const Grid1D g = chebyshev_grid(16);
    const MatrixXd d1 = diff_matrix(g, 1).matrix;

    VectorXd ones = VectorXd::Ones(g.n_points);
    CHECK((d1 * ones).lpNorm<Eigen::Infinity>() <= 1e-12);

    VectorXd dy = d1 * g.points;
    CHECK((dy - ones).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("diff_matrix argument validation") {
    const Grid1D g = chebyshev_grid(8);
    CHECK_THROWS_AS(diff_matrix(g, 3), InvalidParameter);
    CHECK_THROWS_AS(diff_matrix(g, 0), InvalidParameter);
    CHECK_THROWS_AS(diff_matrix(g, 2, BoundaryTreatment::clamped), InvalidParameter);
}

TEST_CASE("clamped fourth derivative of (1-y^2)^2 is 24") {
    // At N = 64 the entries of D4 reach ~1e12, so rounding of the stored
    // matrix alone caps the achievable absolute accuracy near 1e-7.
    for (int N : {8, 16, 32, 64}) {
        const Grid1D g = chebyshev_grid(N);
        const MatrixXd d4c = diff_matrix(g, 4, BoundaryTreatment::clamped).matrix;
        VectorXd f(g.interior_count());
        for (int j = 0; j < g.interior_count(); ++j) {
            const double y = g.points[j + 1];
            f[j] = (1 - y * y) * (1 - y * y);
        }
        VectorXd d4f = d4c * f;
        CHECK((d4f.array() - 24.0).abs().maxCoeff() <= (N <= 32 ? 1e-8 : 1e-6));
    }
}

TEST_CASE("clamped D4 is exact for clamped polynomials up to degree N") {
    // (1-y^2)^2 * y^k has f(+-1) = f'(+-1) = 0; its fourth derivative is
    // polynomial and can be evaluated from monomial coefficients.
    const int N = 12;
    const Grid1D g = chebyshev_grid(N);
    const MatrixXd d4c = diff_matrix(g, 4, BoundaryTreatment::clamped).matrix;

    for (int k = 0; k <= N - 4; ++k) {
        // p(y) = y^k (1 - y^2)^2 = y^k - 2 y^{k+2} + y^{k+4}
        auto mono_d4 = [](int m, double y) {
            if (m < 4) return 0.0;
            double c = double(m) * (m - 1) * (m - 2) * (m - 3);
            return c * std::pow(y, m - 4);
        };
        VectorXd f(g.interior_count()), exact(g.interior_count());
        for (int j = 0; j < g.interior_count(); ++j) {
            const double y = g.points[j + 1];
            f[j] = std::pow(y, k) * (1 - y * y) * (1 - y * y);
            exact[j] = mono_d4(k, y) - 2.0 * mono_d4(k + 2, y) + mono_d4(k + 4, y);
        }
        CHECK(((d4c * f) - exact).lpNorm<Eigen::Infinity>() <= 1e-7);
    }
}

TEST_CASE("spectral convergence of the first derivative") {
    auto err = [](int N) {
        const Grid1D g = chebyshev_grid(N);
        const MatrixXd d1 = diff_matrix(g, 1).matrix;
        VectorXd f(g.n_points), ref(g.n_points);
        for (int j = 0; j < g.n_points; ++j) {
            f[j] = std::sin(pi * g.points[j]);
            ref[j] = pi * std::cos(pi * g.points[j]);
        }
        return ((d1 * f) - ref).lpNorm<Eigen::Infinity>();
    };
    CHECK(err(32) * 100.0 <= err(16));
}

TEST_CASE("D2 equals D1 squared on interior nodes") {
    for (int N : {16, 32, 64}) {
        const Grid1D g = chebyshev_grid(N);
        const MatrixXd d1 = diff_matrix(g, 1).matrix;
        const MatrixXd d2 = diff_matrix(g, 2).matrix;
        const MatrixXd diff = (d2 - d1 * d1).block(1, 1, N - 1, N - 1);
        CHECK(diff.lpNorm<Eigen::Infinity>() / d2.lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("clenshaw-curtis weights") {
    SUBCASE("closed form at N = 2") {
        const Quadrature q = quadrature_weights(chebyshev_grid(2));
        CHECK(q.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(q.weights[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
        CHECK(q.weights[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("sum, positivity, symmetry, low-degree exactness") {
        for (int N : {4, 8, 16, 64, 128}) {
            const Grid1D g = chebyshev_grid(N);
            const Quadrature q = quadrature_weights(g);
            CHECK(std::abs(q.weights.sum() - 2.0) <= 1e-12);
            CHECK(q.weights.minCoeff() > 0.0);
            for (int j = 0; j <= N; ++j) CHECK(q.weights[j] == q.weights[N - j]);

            double integral = 0.0;
            for (int j = 0; j <= N; ++j)
                integral += q.weights[j] * (1.0 - g.points[j] * g.points[j]);
            CHECK(std::abs(integral - 4.0 / 3.0) <= 1e-12);
        }
    }
    SUBCASE("exact for polynomials up to degree N") {
        const int N = 8;
        const Grid1D g = chebyshev_grid(N);
        const Quadrature q = quadrature_weights(g);
        for (int m = 0; m <= N; ++m) {
            double integral = 0.0;
            for (int j = 0; j <= N; ++j) integral += q.weights[j] * std::pow(g.points[j], m);
            const double exact = (m % 2) ? 0.0 : 2.0 / (m + 1);
            CHECK(std::abs(integral - exact) <= 1e-12);
        }
    }
}
