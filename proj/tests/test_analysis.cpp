#include <doctest.h>

#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "bpod/analysis.hpp"
#include "bpod/io.hpp"

using namespace bpod;
using namespace bpod::analysis;

namespace {

MatrixXcd random_complex(Index n, Index m, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    MatrixXcd X(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) X(i, j) = cdouble(dist(rng), dist(rng));
    return X;
}

MatrixXcd random_stable(Index n, std::mt19937_64& rng) {
    MatrixXcd A = random_complex(n, n, rng);
    A -= (A.eigenvalues().real().maxCoeff() + 0.5) * MatrixXcd::Identity(n, n);
    return A;
}

}  // namespace

TEST_CASE("frequency response decays for strictly proper systems") {
    std::mt19937_64 rng(31);
    MatrixXcd A = random_stable(10, rng);
    MatrixXcd B = random_complex(10, 1, rng);
    MatrixXcd C = random_complex(3, 10, rng);

    auto fr = frequency_response(A, B, C, log_grid(1e-2, 1e4, 60));
    CHECK(fr.failed.empty());
    CHECK(fr.sigma_max.minCoeff() >= 0.0);
    CHECK(fr.sigma_max[59] <= 1e-2 * fr.sigma_max.maxCoeff());
}

TEST_CASE("singular resolvent points are flagged, not fatal") {
    MatrixXcd A = MatrixXcd::Zero(2, 2);
    A(0, 0) = cdouble(0.0, 1.0);  // marginally stable at omega = 1
    A(1, 1) = cdouble(-1.0, 0.0);
    MatrixXcd B = MatrixXcd::Ones(2, 1);
    MatrixXcd C = MatrixXcd::Identity(2, 2);
    VectorXd omegas(3);
    omegas << 0.5, 1.0, 2.0;
    auto fr = frequency_response(A, B, C, omegas);
    REQUIRE(fr.failed.size() == 1);
    CHECK(fr.failed[0] == 1);
    CHECK(std::isfinite(fr.sigma_max[0]));
    CHECK(std::isfinite(fr.sigma_max[2]));
}

TEST_CASE("impulse error norm") {
    std::mt19937_64 rng(32);
    MatrixXcd y = random_complex(4, 20, rng);
    VectorXd t = VectorXd::LinSpaced(20, 0.0, 19.0);
    CHECK(impulse_error_2norm(y, y, t) == 0.0);

    MatrixXcd z = y;
    z.row(0).setZero();
    CHECK(impulse_error_2norm(y, z, t) > 0.0);
    CHECK(impulse_error_2norm(y, z, t) <= 1.0);

    MatrixXcd wrong = random_complex(4, 19, rng);
    CHECK_THROWS_AS(impulse_error_2norm(y, wrong, t), DimensionMismatch);
}

TEST_CASE("hinf error of the full-rank rom is negligible and bounds are ordered") {
    std::mt19937_64 rng(33);
    const Index n = 12;
    MatrixXcd A = random_stable(n, rng);
    MatrixXcd B = random_complex(n, 1, rng);
    MatrixXcd C = random_complex(n, n, rng);

    VectorXd hsv = VectorXd::LinSpaced(int(n), 1.0, 0.01).array().square();
    auto H = dense_transfer(A, B, C);
    auto report = hinf_error(H, H, hsv, 5, log_grid(1e-3, 1e2, 120), 0.0);
    CHECK(report.hinf_est <= 1e-8);
    CHECK(report.hsv_lower == hsv[5]);
    CHECK(report.hsv_lower <= report.hsv_upper);
}

TEST_CASE("spectrum is sorted by real part") {
    std::mt19937_64 rng(34);
    MatrixXcd A = random_stable(9, rng);
    auto eigs = spectrum(A);
    for (size_t i = 1; i < eigs.size(); ++i) CHECK(eigs[i].real() <= eigs[i - 1].real());
}

TEST_CASE("reynolds continuation") {
    std::mt19937_64 rng(35);
    balancing::ReducedOrderModel rom;
    rom.rank = 3;
    rom.design_Re = 1000.0;
    rom.Ar_conv = random_complex(3, 3, rng);
    rom.Ar_diff = random_complex(3, 3, rng);
    rom.Ar = rom.Ar_conv + (1.0 / 1000.0) * rom.Ar_diff;
    rom.Br = random_complex(3, 1, rng);
    rom.Cr = random_complex(2, 3, rng);

    auto same = reynolds_continuation(rom, 1000.0);
    CHECK((same.Ar - rom.Ar).norm() <= 1e-12 * rom.Ar.norm());
    CHECK((same.Br - rom.Br).norm() == 0.0);
    CHECK((same.Cr - rom.Cr).norm() == 0.0);

    auto other = reynolds_continuation(rom, 2000.0);
    CHECK((other.Ar - rom.Ar_conv - 0.0005 * rom.Ar_diff).norm() <= 1e-14 * rom.Ar.norm());
    CHECK_THROWS_AS(reynolds_continuation(rom, -1.0), InvalidParameter);
}

TEST_CASE("subspace trace") {
    std::mt19937_64 rng(36);
    const Index n = 18;
    std::normal_distribution<double> dist;
    MatrixXd Wd(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) Wd(i, j) = dist(rng);
    Wd = (Wd.transpose() * Wd + MatrixXd::Identity(n, n)).eval();
    DenseWeight<cdouble> W(Wd);

    MatrixXcd basis = random_complex(n, 4, rng);
    SUBCASE("identical subspaces give the rank") {
        // same span in different coordinates
        MatrixXcd mix = random_complex(4, 4, rng);
        const double T = subspace_trace<cdouble>(basis, MatrixXcd(basis * mix), W);
        CHECK(T == doctest::Approx(4.0).epsilon(1e-10));
    }
    SUBCASE("W-orthogonal subspaces give zero") {
        // complement via W-orthogonal projection of fresh vectors
        MatrixXcd fresh = random_complex(n, 3, rng);
        MatrixXcd G = basis.adjoint() * W.apply(basis);
        MatrixXcd coeff = G.ldlt().solve(basis.adjoint() * W.apply(fresh));
        MatrixXcd ortho = fresh - basis * coeff;
        const double T = subspace_trace<cdouble>(basis, ortho, W);
        CHECK(std::abs(T) <= 1e-10);
    }
    SUBCASE("symmetry and bounds") {
        MatrixXcd other = random_complex(n, 6, rng);
        const double tab = subspace_trace<cdouble>(basis, other, W);
        const double tba = subspace_trace<cdouble>(other, basis, W);
        CHECK(std::abs(tab - tba) <= 1e-10);
        CHECK(tab >= 0.0);
        CHECK(tab <= 4.0 + 1e-10);
    }
}

TEST_CASE("input projection norms") {
    std::mt19937_64 rng(37);
    const Index n = 16;
    std::normal_distribution<double> dist;
    MatrixXd Wd(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) Wd(i, j) = dist(rng);
    Wd = (Wd.transpose() * Wd + MatrixXd::Identity(n, n)).eval();
    DenseWeight<cdouble> W(Wd);

    modal::ModeBasisT<cdouble> basis;
    basis.modes = random_complex(n, 5, rng);
    basis.kind = modal::BasisKind::pod;

    SUBCASE("input inside the span projects to norm one") {
        VectorXcd b = basis.modes * random_complex(5, 1, rng);
        const double v = input_projection_norm<cdouble>(basis, 5, b, W,
                                                        ProjectionMode::orthogonal);
        CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("rank zero projects to zero") {
        VectorXcd b = random_complex(n, 1, rng);
        CHECK(input_projection_norm<cdouble>(basis, 0, b, W,
                                             ProjectionMode::orthogonal) == 0.0);
    }
    SUBCASE("orthogonal projections never exceed one") {
        for (int trial = 0; trial < 5; ++trial) {
            VectorXcd b = random_complex(n, 1, rng);
            for (int r = 1; r <= 5; ++r) {
                CHECK(input_projection_norm<cdouble>(basis, r, b, W,
                                                     ProjectionMode::orthogonal) <=
                      1.0 + 1e-12);
            }
        }
    }
    SUBCASE("petrov mode requires adjoint modes and M") {
        VectorXcd b = random_complex(n, 1, rng);
        CHECK_THROWS_AS(input_projection_norm<cdouble>(basis, 2, b, W,
                                                       ProjectionMode::petrov, &W),
                        InvalidParameter);
        basis.adjoint_modes = random_complex(n, 5, rng);
        CHECK_THROWS_AS(input_projection_norm<cdouble>(basis, 2, b, W,
                                                       ProjectionMode::petrov, nullptr),
                        InvalidParameter);
    }
}

TEST_CASE("csv emitters are deterministic") {
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("bpod_csv_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);

    VectorXd omegas = log_grid(1e-2, 1e2, 5);
    std::vector<NamedSeries> series{{"full", VectorXd::LinSpaced(5, 1.0, 5.0)},
                                    {"rom", VectorXd::LinSpaced(5, 0.9, 4.9)}};
    const std::string a = (dir / "a.csv").string();
    const std::string b = (dir / "b.csv").string();
    write_freq_response_csv(a, omegas, series);
    write_freq_response_csv(b, omegas, series);
    CHECK(io::fnv1a_file(a) == io::fnv1a_file(b));

    std::vector<ErrorReport> reports(2);
    reports[0].rank = 1;
    reports[0].hinf_est = 0.25;
    reports[1].rank = 2;
    write_error_norms_csv((dir / "e.csv").string(), reports, {"bt", "bt"});
    CHECK(fs::file_size(dir / "e.csv") > 0);

    write_values_csv((dir / "v.csv").string(), VectorXd::LinSpaced(4, 4.0, 1.0), 10.0);
    CHECK(fs::file_size(dir / "v.csv") > 0);
    fs::remove_all(dir);
}
