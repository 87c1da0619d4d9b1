#include "bpod/channel.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "bpod/linalg.hpp"

namespace bpod::channel {

namespace {

const cdouble kI(0.0, 1.0);

MatrixXcd solve_spd(const MatrixXd& M, const MatrixXcd& B) {
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("solve_spd: weight matrix not positive definite");
    }
    MatrixXcd X(B.rows(), B.cols());
    X.real() = llt.solve(B.real().eval());
    X.imag() = llt.solve(B.imag().eval());
    return X;
}

}  // namespace

BaseFlow poiseuille(const spectral::Grid1D& grid) {
    BaseFlow flow;
    flow.U = 1.0 - grid.points.array().square();
    flow.Uprime = -2.0 * grid.points;
    flow.Udoubleprime = VectorXd::Constant(grid.n_points, -2.0);
    return flow;
}

StateSpaceModel build_os_squire(const WavenumberPair& wn, double reynolds,
                                const spectral::Grid1D& grid) {
    if (reynolds <= 0.0) {
        throw InvalidParameter("build_os_squire: Re must be positive");
    }
    if (wn.k2() <= 0.0) {
        throw InvalidParameter("build_os_squire: k^2 must be positive; the (0,0) "
                               "mean mode is excluded");
    }

    StateSpaceModel m;
    m.grid = grid;
    m.wavenumber = wn;
    m.reynolds = reynolds;

    const int n = grid.n_points;
    const int ni = grid.interior_count();
    const double k2 = wn.k2();

    const auto d = spectral::derivative_matrices(grid);
    m.d1_full = d[0];
    m.d2_interior = d[1].block(1, 1, ni, ni);
    m.d4_clamped =
        diff_matrix(grid, 4, spectral::BoundaryTreatment::clamped).matrix;
    m.quad = spectral::quadrature_weights(grid).weights;

    const BaseFlow flow = poiseuille(grid);
    const VectorXd U = flow.U.segment(1, ni);
    const VectorXd Up = flow.Uprime.segment(1, ni);

    // Laplacian and clamped bilaplacian at this wavenumber (interior).
    const MatrixXd lap = m.d2_interior - k2 * MatrixXd::Identity(ni, ni);
    const MatrixXd lap2 = m.d4_clamped - 2.0 * k2 * m.d2_interior +
                          k2 * k2 * MatrixXd::Identity(ni, ni);

    // Mass operator -Delta for the v block, inverted once.
    Eigen::PartialPivLU<MatrixXd> mass_lu(-lap);

    // d(-Delta v)/dt = L_OS v:  L_OS = i a U Delta - i a U'' - (1/Re) Delta^2,
    // with U'' = -2.  Convective and diffusive parts are kept separate and
    // combined as A = A_conv + (1/Re) A_diff so the split is exact.
    const MatrixXd os_conv_real =
        mass_lu.solve((U.asDiagonal() * lap + 2.0 * MatrixXd::Identity(ni, ni)).eval());
    const MatrixXd os_diff_real = mass_lu.solve((-lap2).eval());

    m.A_conv = MatrixXcd::Zero(2 * ni, 2 * ni);
    m.A_diff = MatrixXcd::Zero(2 * ni, 2 * ni);

    m.A_conv.topLeftCorner(ni, ni) = kI * wn.alpha * os_conv_real;
    m.A_conv.bottomLeftCorner(ni, ni) = (-kI * wn.beta) * MatrixXd(Up.asDiagonal());
    m.A_conv.bottomRightCorner(ni, ni) = (-kI * wn.alpha) * MatrixXd(U.asDiagonal());

    m.A_diff.topLeftCorner(ni, ni) = os_diff_real;
    m.A_diff.bottomRightCorner(ni, ni) = lap;

    m.A = m.A_conv + (1.0 / reynolds) * m.A_diff;

    // Integrated-by-parts inner-product weights:
    //   <q,q>_M = int |v'|^2 + k^2 |v|^2 + |eta|^2,   E = M / (2 k^2).
    const MatrixXd d1i = m.d1_full.middleCols(1, ni);  // zero-extended interior data
    const VectorXd wi = m.quad.segment(1, ni);
    MatrixXd mv = d1i.transpose() * m.quad.asDiagonal() * d1i;
    mv += k2 * MatrixXd(wi.asDiagonal());
    mv = 0.5 * (mv + mv.transpose());

    m.M_weight = MatrixXd::Zero(2 * ni, 2 * ni);
    m.M_weight.topLeftCorner(ni, ni) = mv;
    m.M_weight.bottomRightCorner(ni, ni) = wi.asDiagonal();
    m.E_weight = m.M_weight / (2.0 * k2);

    return m;
}

MatrixXcd build_adjoint(const StateSpaceModel& model) {
    // A+ = M^{-1} A^H M with M real symmetric: A^H M = (M A)^H.
    const MatrixXcd ma = real_times_complex(model.M_weight, model.A);
    return solve_spd(model.M_weight, ma.adjoint());
}

MatrixXcd build_adjoint_continuous(const StateSpaceModel& model) {
    const int ni = model.interior_count();
    const double k2 = model.wavenumber.k2();
    const double alpha = model.wavenumber.alpha;
    const double beta = model.wavenumber.beta;
    const double Re = model.reynolds;

    const BaseFlow flow = poiseuille(model.grid);
    const VectorXd U = flow.U.segment(1, ni);
    const VectorXd Up = flow.Uprime.segment(1, ni);
    const MatrixXd d1i = model.d1_full.block(1, 1, ni, ni);

    const MatrixXd lap = model.d2_interior - k2 * MatrixXd::Identity(ni, ni);
    const MatrixXd lap2 = model.d4_clamped - 2.0 * k2 * model.d2_interior +
                          k2 * k2 * MatrixXd::Identity(ni, ni);

    // d(-Delta z_v)/dt = L*_OS z_v + U' dz/dz z_eta,  d(z_eta)/dt = L*_SQ z_eta:
    //   L*_OS = -i a U Delta - 2 i a U' D - (1/Re) Delta^2
    //   L*_SQ =  i a U + (1/Re) Delta
    MatrixXcd los = -kI * alpha * (U.asDiagonal() * lap).eval() -
                    2.0 * kI * alpha * (Up.asDiagonal() * d1i).eval() -
                    (1.0 / Re) * lap2;
    MatrixXcd coupling = kI * beta * MatrixXd(Up.asDiagonal());
    MatrixXcd lsq = kI * alpha * MatrixXd(U.asDiagonal()) + (1.0 / Re) * lap;

    Eigen::PartialPivLU<MatrixXd> mass_lu((-lap).eval());
    auto mass_solve = [&](const MatrixXcd& X) {
        MatrixXcd Y(X.rows(), X.cols());
        Y.real() = mass_lu.solve(X.real().eval());
        Y.imag() = mass_lu.solve(X.imag().eval());
        return Y;
    };

    MatrixXcd adj = MatrixXcd::Zero(2 * ni, 2 * ni);
    adj.topLeftCorner(ni, ni) = mass_solve(los);
    adj.topRightCorner(ni, ni) = mass_solve(coupling);
    adj.bottomRightCorner(ni, ni) = lsq;
    return adj;
}

VectorXcd pack_state(const StateVector& q) {
    VectorXcd x(q.v.size() + q.eta.size());
    x << q.v, q.eta;
    return x;
}

StateVector unpack_state(const StateSpaceModel& model, const VectorXcd& x) {
    const Index ni = model.interior_count();
    if (x.size() != 2 * ni) {
        throw DimensionMismatch("unpack_state: state length mismatch");
    }
    return StateVector{x.head(ni), x.tail(ni)};
}

cdouble m_inner_product(const StateVector& q1, const StateVector& q2,
                        const StateSpaceModel& model) {
    const Index ni = model.interior_count();
    if (q1.v.size() != ni || q2.v.size() != ni || q1.eta.size() != ni ||
        q2.eta.size() != ni) {
        throw DimensionMismatch("m_inner_product: state sizes do not match the model");
    }
    const VectorXcd x1 = pack_state(q1);
    const VectorXcd x2 = pack_state(q2);
    return (x1.adjoint() * real_times_complex(model.M_weight, x2))(0, 0);
}

cdouble energy_inner_product(const StateVector& q1, const StateVector& q2,
                             const StateSpaceModel& model) {
    if (model.wavenumber.k2() <= 0.0) {
        throw InvalidParameter("energy_inner_product: velocity recovery undefined at k^2 = 0");
    }
    const Velocities a = recover_velocities(q1, model);
    const Velocities b = recover_velocities(q2, model);
    const VectorXd& w = model.quad;
    cdouble e = 0.0;
    for (Index j = 0; j < w.size(); ++j) {
        e += w[j] * (std::conj(a.u[j]) * b.u[j] + std::conj(a.v[j]) * b.v[j] +
                     std::conj(a.w[j]) * b.w[j]);
    }
    return 0.5 * e;
}

double state_energy(const StateSpaceModel& model, const VectorXcd& x) {
    return (x.adjoint() * real_times_complex(model.E_weight, x))(0, 0).real();
}

Velocities recover_velocities(const StateVector& q, const WavenumberPair& wn,
                              const MatrixXd& d1_full) {
    const double k2 = wn.k2();
    if (k2 <= 0.0) {
        throw InvalidParameter("recover_velocities: k^2 must be positive");
    }
    const Index n = d1_full.rows();
    const Index ni = q.v.size();
    if (ni != n - 2 || q.eta.size() != ni) {
        throw DimensionMismatch("recover_velocities: interior sizes do not match grid");
    }

    VectorXcd v_ext = VectorXcd::Zero(n);
    v_ext.segment(1, ni) = q.v;
    VectorXcd eta_ext = VectorXcd::Zero(n);
    eta_ext.segment(1, ni) = q.eta;

    VectorXcd dv(n);
    dv.real() = d1_full * v_ext.real();
    dv.imag() = d1_full * v_ext.imag();

    Velocities vel;
    vel.v = v_ext;
    vel.u = (kI / k2) * (wn.alpha * dv - wn.beta * eta_ext);
    vel.w = (kI / k2) * (wn.beta * dv + wn.alpha * eta_ext);
    return vel;
}

Velocities recover_velocities(const StateVector& q, const StateSpaceModel& model) {
    return recover_velocities(q, model.wavenumber, model.d1_full);
}

OptimalPerturbation optimal_perturbation(const StateSpaceModel& model, double horizon) {
    const Index n = model.state_dim();
    linalg::EigPropagator prop(model.A);
    if (prop.max_real_part() >= 0.0) {
        throw InvalidParameter("optimal_perturbation: model is unstable, growth unbounded");
    }

    // Energy Cholesky factor F with E = F^T F; G(t) = sigma_max(F e^{At} F^{-1})^2.
    Eigen::LLT<MatrixXd> llt(model.E_weight);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("optimal_perturbation: energy weight not positive definite");
    }
    const MatrixXd F = llt.matrixL().transpose();

    auto weighted_propagator = [&](double t) {
        MatrixXcd P = prop.propagator(t);
        MatrixXcd FP = real_times_complex(F, P);
        // FP * F^{-1} by triangular solve on the right: (F^{-T} FP^T)^T.
        MatrixXcd tmp = FP.transpose();
        tmp.real() = F.transpose().triangularView<Eigen::Lower>().solve(tmp.real().eval());
        tmp.imag() = F.transpose().triangularView<Eigen::Lower>().solve(tmp.imag().eval());
        return MatrixXcd(tmp.transpose());
    };
    auto growth_at = [&](double t) {
        return weighted_propagator(t).jacobiSvd().singularValues()(0);
    };

    double t_star = horizon;
    double sweep_end = horizon;
    if (horizon <= 0.0) {
        // Global optimum: coarse sweep out to a few decay times, extend if the
        // maximum sits on the right edge, then refine.
        const double tau = 1.0 / std::abs(prop.max_real_part());
        double t_hi = std::min(2.0 * tau, 2000.0);
        const int coarse = 96;
        double best_t = 0.0, best_g = 1.0;
        for (int pass = 0; pass < 4; ++pass) {
            for (int i = 1; i <= coarse; ++i) {
                const double t = t_hi * i / coarse;
                const double g = growth_at(t);
                if (g > best_g) {
                    best_g = g;
                    best_t = t;
                }
            }
            if (best_t < 0.9 * t_hi) break;
            t_hi *= 2.0;
        }
        const double dt = t_hi / coarse;
        t_star = linalg::golden_section_max(
            [&](double t) { return growth_at(t); }, std::max(0.0, best_t - dt),
            best_t + dt, 1e-4 * std::max(best_t, 1.0));
        sweep_end = 2.0 * t_star;
    }

    Eigen::JacobiSVD<MatrixXcd> svd(weighted_propagator(t_star), Eigen::ComputeThinV);
    VectorXcd x0 = svd.matrixV().col(0);
    // Back to state coordinates and exact unit energy.
    x0.real() = F.triangularView<Eigen::Upper>().solve(x0.real().eval());
    x0.imag() = F.triangularView<Eigen::Upper>().solve(x0.imag().eval());
    x0 /= std::sqrt(state_energy(model, x0));

    OptimalPerturbation result;
    result.state = x0;
    const int samples = 200;
    result.curve.times.resize(samples + 1);
    result.curve.growth.resize(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        const double t = sweep_end * i / samples;
        result.curve.times[i] = t;
        result.curve.growth[i] = growth_at(t);
        result.curve.growth[i] *= result.curve.growth[i];
    }
    result.curve.peak_time = t_star;
    const double s = growth_at(t_star);
    result.curve.peak_growth = s * s;
    return result;
}

}  // namespace bpod::channel
