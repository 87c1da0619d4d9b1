#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bpod/channel.hpp"

using namespace bpod;
using namespace bpod::channel;

namespace {

VectorXcd random_state(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    VectorXcd x(n);
    for (Index j = 0; j < n; ++j) x[j] = cdouble(dist(rng), dist(rng));
    return x;
}

double max_real_eig(const MatrixXcd& A) {
    return Eigen::ComplexEigenSolver<MatrixXcd>(A, false).eigenvalues().real().maxCoeff();
}

}  // namespace

TEST_CASE("argument validation") {
    auto g = spectral::chebyshev_grid(16);
    CHECK_THROWS_AS(build_os_squire({0.0, 0.0}, 1000.0, g), InvalidParameter);
    CHECK_THROWS_AS(build_os_squire({1.0, 1.0}, -5.0, g), InvalidParameter);
}

TEST_CASE("base flow") {
    auto g = spectral::chebyshev_grid(32);
    auto flow = poiseuille(g);
    CHECK(flow.U[0] == 0.0);
    CHECK(flow.U[g.n_points - 1] == 0.0);
    CHECK(flow.U[g.n_points / 2] == 1.0);
    for (int j = 0; j < g.n_points; ++j) {
        CHECK(flow.Uprime[j] == -flow.Uprime[g.n_points - 1 - j]);
        CHECK(flow.Udoubleprime[j] == -2.0);
    }
}

TEST_CASE("convective/diffusive split is exact") {
    auto g = spectral::chebyshev_grid(32);
    auto m = build_os_squire({1.0, 1.0}, 1000.0, g);
    CHECK((m.A - (m.A_conv + (1.0 / m.reynolds) * m.A_diff)).norm() == 0.0);
}

TEST_CASE("inner-product weights are symmetric positive definite") {
    auto g = spectral::chebyshev_grid(24);
    auto m = build_os_squire({1.0, 2.0}, 500.0, g);
    CHECK((m.M_weight - m.M_weight.transpose()).norm() <= 1e-14 * m.M_weight.norm());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.M_weight);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK((m.E_weight * 2.0 * m.wavenumber.k2() - m.M_weight).norm() <=
          1e-13 * m.M_weight.norm());
}

TEST_CASE("stability threshold brackets Re ~ 5772 at alpha = 1.02") {
    auto g = spectral::chebyshev_grid(64);
    auto stable = build_os_squire({1.02, 0.0}, 5500.0, g);
    auto unstable = build_os_squire({1.02, 0.0}, 6100.0, g);
    CHECK(max_real_eig(stable.A) < 0.0);
    CHECK(max_real_eig(unstable.A) > 0.0);
}

TEST_CASE("squire branch is stable at all tested Re") {
    auto g = spectral::chebyshev_grid(48);
    for (double Re : {500.0, 2000.0}) {
        auto m = build_os_squire({0.0, 2.0}, Re, g);
        CHECK(max_real_eig(m.A) < 0.0);
    }
}

TEST_CASE("orr-sommerfeld eigenvalue matches the classical Re=10^4 value") {
    // Grid-converged reference (identical at N = 64, 96 and 128 to 9 digits).
    auto g = spectral::chebyshev_grid(64);
    auto m = build_os_squire({1.0, 0.0}, 10000.0, g);
    Eigen::ComplexEigenSolver<MatrixXcd> ces(m.A, false);
    Index idx;
    ces.eigenvalues().real().maxCoeff(&idx);
    const cdouble lead = ces.eigenvalues()[idx];
    CHECK(std::abs(lead - cdouble(0.0037396706, -0.2375264888)) <= 1e-8);
}

TEST_CASE("least-stable eigenvalue is grid converged at (1,1,1000)") {
    auto lead_eig = [](int N) {
        auto g = spectral::chebyshev_grid(N);
        auto m = build_os_squire({1.0, 1.0}, 1000.0, g);
        Eigen::ComplexEigenSolver<MatrixXcd> ces(m.A, false);
        Index idx;
        ces.eigenvalues().real().maxCoeff(&idx);
        return ces.eigenvalues()[idx];
    };
    const cdouble e64 = lead_eig(64);
    const cdouble e96 = lead_eig(96);
    CHECK(std::abs(e64 - e96) < 1e-6);
    // six-digit agreement with the N = 128 oracle run
    CHECK(std::abs(e64 - cdouble(-0.024360679722, -0.977639320281)) <= 1e-7);
}

TEST_CASE("operators at (-a,-b) are conjugates of (a,b)") {
    auto g = spectral::chebyshev_grid(24);
    auto mp = build_os_squire({1.0, 1.0}, 1000.0, g);
    auto mm = build_os_squire({-1.0, -1.0}, 1000.0, g);
    CHECK((mm.A - mp.A.conjugate()).norm() == 0.0);
}

TEST_CASE("discrete adjoint satisfies the M-adjoint identity") {
    auto g = spectral::chebyshev_grid(32);
    auto m = build_os_squire({1.0, 1.0}, 1000.0, g);
    MatrixXcd adj = build_adjoint(m);
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        VectorXcd x = random_state(m.state_dim(), rng);
        VectorXcd z = random_state(m.state_dim(), rng);
        auto qx = unpack_state(m, x);
        auto qz = unpack_state(m, z);
        auto qax = unpack_state(m, VectorXcd(m.A * x));
        auto qaz = unpack_state(m, VectorXcd(adj * z));
        const cdouble lhs = m_inner_product(qax, qz, m);
        const cdouble rhs = m_inner_product(qx, qaz, m);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * x.norm() * z.norm());
    }
}

TEST_CASE("adjoint eigenvalues are conjugates of the direct ones") {
    auto g = spectral::chebyshev_grid(32);
    auto m = build_os_squire({1.0, 1.0}, 1000.0, g);
    MatrixXcd adj = build_adjoint(m);
    Eigen::ComplexEigenSolver<MatrixXcd> ea(m.A, false), eb(adj, false);
    std::vector<cdouble> va(ea.eigenvalues().data(),
                            ea.eigenvalues().data() + ea.eigenvalues().size());
    std::vector<cdouble> vb(eb.eigenvalues().data(),
                            eb.eigenvalues().data() + eb.eigenvalues().size());
    for (auto& z : vb) z = std::conj(z);
    auto cmp = [](cdouble a, cdouble b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(va.begin(), va.end(), cmp);
    std::sort(vb.begin(), vb.end(), cmp);
    double worst = 0.0;
    for (size_t i = 0; i < va.size(); ++i) worst = std::max(worst, std::abs(va[i] - vb[i]));
    CHECK(worst <= 1e-8);
}

TEST_CASE("discrete adjoint matches the continuous-adjoint collocation weakly") {
    // Weak-form comparison on smooth clamped states: <A p, q>_M computed with
    // the direct operator against <p, A+ q>_M with the collocation of the
    // adjoint equations.  (As raw matrices the two constructions legitimately
    // differ on rough grid functions.)
    for (int N : {32, 64}) {
        auto g = spectral::chebyshev_grid(N);
        auto m = build_os_squire({1.0, 1.0}, 1000.0, g);
        MatrixXcd adj_cont = build_adjoint_continuous(m);
        const int ni = g.interior_count();
        const int K = 8;
        MatrixXcd P(2 * ni, K), Q(2 * ni, K);
        for (int k = 0; k < K; ++k) {
            for (int j = 0; j < ni; ++j) {
                const double y = g.points[j + 1];
                const double c2 = (1 - y * y) * (1 - y * y);
                const double t1 = std::cos(k * std::acos(y));
                const double t2 = std::cos((k + 1) * std::acos(y));
                P(j, k) = cdouble(c2 * t1, 0.5 * c2 * t2);
                P(ni + j, k) = cdouble((1 - y * y) * t2, -0.3 * (1 - y * y) * t1);
                Q(j, k) = cdouble(c2 * t2, -c2 * t1);
                Q(ni + j, k) = cdouble(0.7 * (1 - y * y) * t1, (1 - y * y) * t2);
            }
        }
        MatrixXcd G1 = (m.A * P).adjoint() * real_times_complex(m.M_weight, Q);
        MatrixXcd G2 = P.adjoint() * real_times_complex(m.M_weight, MatrixXcd(adj_cont * Q));
        CHECK((G1 - G2).norm() / G1.norm() <= 1e-6);
    }
}

TEST_CASE("m inner product basics") {
    auto g = spectral::chebyshev_grid(32);
    auto m = build_os_squire({1.0, 1.0}, 1000.0, g);
    std::mt19937_64 rng(7);

    SUBCASE("positive and real on the diagonal") {
        for (int t = 0; t < 5; ++t) {
            auto q = unpack_state(m, random_state(m.state_dim(), rng));
            const cdouble v = m_inner_product(q, q, m);
            CHECK(std::abs(v.imag()) <= 1e-12 * std::abs(v));
            CHECK(v.real() > 0.0);
        }
    }
    SUBCASE("v = 0 reduces to the weighted eta product") {
        auto q1 = unpack_state(m, random_state(m.state_dim(), rng));
        auto q2 = unpack_state(m, random_state(m.state_dim(), rng));
        q1.v.setZero();
        q2.v.setZero();
        const VectorXd wi = m.quad.segment(1, m.interior_count());
        cdouble expect = 0.0;
        for (Index j = 0; j < wi.size(); ++j)
            expect += wi[j] * std::conj(q1.eta[j]) * q2.eta[j];
        CHECK(std::abs(m_inner_product(q1, q2, m) - expect) <= 1e-12 * std::abs(expect));
    }
    SUBCASE("equals 2 k^2 E on random states") {
        for (int t = 0; t < 5; ++t) {
            auto q = unpack_state(m, random_state(m.state_dim(), rng));
            const cdouble mm = m_inner_product(q, q, m);
            const cdouble ee = energy_inner_product(q, q, m);
            CHECK(std::abs(mm - 2.0 * m.wavenumber.k2() * ee) <= 1e-8 * std::abs(mm));
        }
    }
}

TEST_CASE("energy inner product definiteness and eta-only reduction") {
    auto g = spectral::chebyshev_grid(32);
    auto m = build_os_squire({0.0, 2.0}, 1000.0, g);
    std::mt19937_64 rng(13);

    auto zero = unpack_state(m, VectorXcd::Zero(m.state_dim()));
    CHECK(std::abs(energy_inner_product(zero, zero, m)) == 0.0);

    auto q = unpack_state(m, random_state(m.state_dim(), rng));
    CHECK(energy_inner_product(q, q, m).real() > 0.0);

    // pure eta state at alpha = 0: E = (1/(2 beta^2)) int |eta|^2
    q.v.setZero();
    const VectorXd wi = m.quad.segment(1, m.interior_count());
    double expect = 0.0;
    for (Index j = 0; j < wi.size(); ++j)
        expect += wi[j] * std::norm(q.eta[j]);
    expect /= 2.0 * m.wavenumber.beta * m.wavenumber.beta;
    CHECK(energy_inner_product(q, q, m).real() ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("velocity recovery satisfies continuity and the vorticity definition") {
    auto g = spectral::chebyshev_grid(32);
    const WavenumberPair wn{1.3, -0.7};
    auto m = build_os_squire(wn, 1000.0, g);
    std::mt19937_64 rng(3);
    auto q = unpack_state(m, random_state(m.state_dim(), rng));
    auto vel = recover_velocities(q, m);

    VectorXcd dv(g.n_points);
    dv.real() = m.d1_full * vel.v.real();
    dv.imag() = m.d1_full * vel.v.imag();

    const cdouble ia(0.0, wn.alpha), ib(0.0, wn.beta);
    double div_max = 0.0, vort_max = 0.0;
    for (int j = 0; j < g.n_points; ++j) {
        div_max = std::max(div_max, std::abs(ia * vel.u[j] + dv[j] + ib * vel.w[j]));
        const cdouble eta = (j >= 1 && j < g.n_points - 1) ? q.eta[j - 1] : cdouble(0);
        vort_max = std::max(vort_max, std::abs(ib * vel.u[j] - ia * vel.w[j] - eta));
    }
    const double scale = std::max(1.0, std::sqrt(std::abs(
        m_inner_product(q, q, m))));
    CHECK(div_max <= 1e-10 * scale);
    CHECK(vort_max <= 1e-10 * scale);
}

TEST_CASE("velocity recovery specializes at alpha = 0") {
    auto g = spectral::chebyshev_grid(24);
    const WavenumberPair wn{0.0, 2.0};
    auto m = build_os_squire(wn, 500.0, g);
    std::mt19937_64 rng(9);
    auto q = unpack_state(m, random_state(m.state_dim(), rng));
    auto vel = recover_velocities(q, m);

    VectorXcd dv(g.n_points);
    dv.real() = m.d1_full * vel.v.real();
    dv.imag() = m.d1_full * vel.v.imag();
    const cdouble i(0.0, 1.0);
    for (int j = 1; j < g.n_points - 1; ++j) {
        CHECK(std::abs(vel.u[j] - (-i * q.eta[j - 1] / wn.beta)) <= 1e-12);
        CHECK(std::abs(vel.w[j] - (i * dv[j] / wn.beta)) <= 1e-12);
    }
    CHECK_THROWS_AS(recover_velocities(q, WavenumberPair{0.0, 0.0}, m.d1_full),
                    InvalidParameter);
}

TEST_CASE("optimal perturbation growth for (1,1) at Re=1000") {
    auto g = spectral::chebyshev_grid(64);
    auto m = build_os_squire({1.0, 1.0}, 1000.0, g);
    auto opt = optimal_perturbation(m, 0.0);

    CHECK(std::abs(opt.curve.growth[0] - 1.0) <= 1e-10);
    CHECK(opt.curve.peak_growth >= 1.0);
    CHECK(state_energy(m, opt.state) == doctest::Approx(1.0).epsilon(1e-12));

    // Frozen from N = 64/96 oracle runs (agree to six digits).
    CHECK(opt.curve.peak_growth == doctest::Approx(28.120061).epsilon(1e-4));
    CHECK(opt.curve.peak_time == doctest::Approx(15.606796).epsilon(1e-4));

    // single hump: rises to the peak, decays past it
    const auto& ts = opt.curve.times;
    const auto& gr = opt.curve.growth;
    Index peak_idx;
    gr.maxCoeff(&peak_idx);
    for (Index i = 1; i <= peak_idx; ++i) CHECK(gr[i] >= gr[i - 1] - 1e-9);
    for (Index i = peak_idx + 1; i < ts.size(); ++i) CHECK(gr[i] <= gr[i - 1] + 1e-9);
}

TEST_CASE("optimal perturbation refuses unstable models") {
    auto g = spectral::chebyshev_grid(64);
    auto m = build_os_squire({1.02, 0.0}, 6100.0, g);
    CHECK_THROWS_AS(optimal_perturbation(m, 0.0), InvalidParameter);
}
