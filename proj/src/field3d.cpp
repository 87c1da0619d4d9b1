#include "bpod/field3d.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

namespace bpod::field3d {

namespace {

constexpr double kPi = std::numbers::pi;
const cdouble kI(0.0, 1.0);

MatrixXcd dft_matrix(int n, double sign) {
    MatrixXcd F(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            F(k, j) = std::exp(cdouble(0.0, sign * 2.0 * kPi * k * j / n));
    return F;
}

using PlaneMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>;
using CPlaneMap = Eigen::Map<const MatrixXcd>;

}  // namespace

Box3D make_box(int Nx, int N_wall_normal, int Nz, double Lx, double Lz) {
    if (Nx < 4 || Nz < 4 || Nx % 2 || Nz % 2) {
        throw InvalidParameter("make_box: Nx, Nz must be even and >= 4");
    }
    if ((Nx & (Nx - 1)) != 0 || (Nz & (Nz - 1)) != 0) {
        throw InvalidParameter("make_box: Nx, Nz must be powers of two");
    }
    Box3D box;
    box.Lx = Lx;
    box.Lz = Lz;
    box.Nx = Nx;
    box.Nz = Nz;
    box.grid = spectral::chebyshev_grid(N_wall_normal);
    return box;
}

Field3D gaussian_actuator(const Box3D& box, double amplitude, double alpha_r,
                          double alpha_y) {
    if (amplitude <= 0.0 || alpha_r <= 0.0 || alpha_y <= 0.0) {
        throw InvalidParameter("gaussian_actuator: parameters must be positive");
    }
    Field3D f;
    f.box = box;
    const int ny = box.grid.n_points;
    f.v.resize(box.Nx * box.Nz, ny);
    f.eta = MatrixXd::Zero(box.Nx * box.Nz, ny);

    const double xc = 0.5 * box.Lx, zc = 0.5 * box.Lz;
    const double a2 = alpha_r * alpha_r;
    for (int ix = 0; ix < box.Nx; ++ix) {
        const double x = box.Lx * ix / box.Nx;
        for (int iz = 0; iz < box.Nz; ++iz) {
            const double z = box.Lz * iz / box.Nz;
            const double r2 = (x - xc) * (x - xc) + (z - zc) * (z - zc);
            const double horizontal = (1.0 - r2 / a2) * std::exp(-r2 / a2);
            for (int iy = 0; iy < ny; ++iy) {
                const double y = box.grid.points[iy];
                f.v(ix * box.Nz + iz, iy) =
                    amplitude * horizontal *
                    std::exp(-y * y / (alpha_y * alpha_y)) * (std::cos(kPi * y) + 1.0);
            }
        }
    }
    return f;
}

SpectralField to_spectral(const Field3D& field) {
    const Box3D& box = field.box;
    const int ny = box.grid.n_points;
    const MatrixXcd Fx = dft_matrix(box.Nx, -1.0);
    const MatrixXcd Fz = dft_matrix(box.Nz, -1.0);
    const double scale = 1.0 / (double(box.Nx) * box.Nz);

    SpectralField spec;
    spec.box = box;
    spec.v_hat.resize(box.Nx * box.Nz, ny);
    spec.eta_hat.resize(box.Nx * box.Nz, ny);

    auto transform = [&](const MatrixXd& phys, MatrixXcd& hat) {
        for (int iy = 0; iy < ny; ++iy) {
            // column iy viewed as an Nz x Nx matrix (iz fastest)
            PlaneMap plane(phys.col(iy).data(), box.Nz, box.Nx);
            MatrixXcd ph = scale * (Fz * plane.cast<cdouble>() * Fx.transpose());
            Eigen::Map<MatrixXcd>(hat.col(iy).data(), box.Nz, box.Nx) = ph;
        }
    };
    transform(field.v, spec.v_hat);
    transform(field.eta, spec.eta_hat);

    // The disturbance class is mean-free; grid sampling of an analytically
    // mean-free field leaves an exponentially small residue, which is pinned
    // back to zero.  Anything larger is a genuine mean and is rejected.
    const double peak =
        std::max(spec.v_hat.cwiseAbs().maxCoeff(), spec.eta_hat.cwiseAbs().maxCoeff());
    const double mean_v = spec.v_hat.row(0).cwiseAbs().maxCoeff();
    const double mean_eta = spec.eta_hat.row(0).cwiseAbs().maxCoeff();
    if (peak > 0.0 && std::max(mean_v, mean_eta) > 1e-6 * peak) {
        char frac[32];
        std::snprintf(frac, sizeof(frac), "%.3e", std::max(mean_v, mean_eta) / peak);
        throw InvalidParameter(
            "to_spectral: field has a nonzero horizontal mean ((0,0) coefficient " +
            std::string(frac) + " of peak); the mean-free disturbance class excludes it");
    }
    spec.v_hat.row(0).setZero();
    spec.eta_hat.row(0).setZero();
    return spec;
}

Field3D from_spectral(const SpectralField& spec) {
    const Box3D& box = spec.box;
    const int ny = box.grid.n_points;
    const MatrixXcd Fx = dft_matrix(box.Nx, +1.0);
    const MatrixXcd Fz = dft_matrix(box.Nz, +1.0);

    Field3D f;
    f.box = box;
    f.v.resize(box.Nx * box.Nz, ny);
    f.eta.resize(box.Nx * box.Nz, ny);

    auto transform = [&](const MatrixXcd& hat, MatrixXd& phys) {
        for (int iy = 0; iy < ny; ++iy) {
            CPlaneMap plane(hat.col(iy).data(), box.Nz, box.Nx);
            MatrixXcd ph = Fz * plane * Fx.transpose();
            Eigen::Map<MatrixXd>(phys.col(iy).data(), box.Nz, box.Nx) = ph.real();
        }
    };
    transform(spec.v_hat, f.v);
    transform(spec.eta_hat, f.eta);
    return f;
}

GlobalSystem build_global_system(const Box3D& box, double reynolds) {
    GlobalSystem sys;
    sys.box = box;
    sys.reynolds = reynolds;

    const double ax = 2.0 * kPi / box.Lx;
    const double az = 2.0 * kPi / box.Lz;
    for (int kz = 0; kz <= box.Nz / 2 - 1; ++kz) {
        for (int kx = -(box.Nx / 2 - 1); kx <= box.Nx / 2 - 1; ++kx) {
            if (kz == 0 && kx <= 0) continue;  // half spectrum, mean excluded
            WavenumberEntry e;
            e.kx = kx;
            e.kz = kz;
            e.wn = channel::WavenumberPair{ax * kx, az * kz};
            sys.entries.push_back(e);
        }
    }

    sys.blocks.reserve(sys.entries.size());
    sys.offsets.resize(sys.entries.size() + 1);
    sys.offsets[0] = 0;
    for (size_t i = 0; i < sys.entries.size(); ++i) {
        sys.blocks.push_back(
            channel::build_os_squire(sys.entries[i].wn, reynolds, box.grid));
        if (i == 0) sys.block_complex_dim = sys.blocks[0].state_dim();
        sys.offsets[i + 1] = sys.offsets[i] + 2 * sys.block_complex_dim;
    }
    return sys;
}

GlobalSystem single_wavenumber_system(const channel::WavenumberPair& wn, double reynolds,
                                      const spectral::Grid1D& grid) {
    GlobalSystem sys;
    sys.box.Lx = 1.0;
    sys.box.Lz = 1.0;
    sys.box.Nx = 0;
    sys.box.Nz = 0;
    sys.box.grid = grid;
    sys.reynolds = reynolds;
    WavenumberEntry e;
    e.kx = 1;
    e.kz = 1;
    e.wn = wn;
    sys.entries.push_back(e);
    sys.blocks.push_back(channel::build_os_squire(wn, reynolds, grid));
    sys.block_complex_dim = sys.blocks[0].state_dim();
    sys.offsets = {0, 2 * sys.block_complex_dim};
    return sys;
}

std::vector<VectorXcd> unstack(const GlobalSystem& sys, const VectorXd& x) {
    if (x.size() != sys.stacked_dim()) throw DimensionMismatch("unstack: bad state size");
    std::vector<VectorXcd> blocks(sys.entries.size());
    const Index nb = sys.block_complex_dim;
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        const double s = std::sqrt(sys.scale(e));
        VectorXcd q(nb);
        q.real() = x.segment(sys.offsets[e], nb) / s;
        q.imag() = x.segment(sys.offsets[e] + nb, nb) / s;
        blocks[e] = q;
    }
    return blocks;
}

VectorXd stack(const GlobalSystem& sys, const std::vector<VectorXcd>& blocks) {
    if (blocks.size() != sys.entries.size()) throw DimensionMismatch("stack: block count");
    VectorXd x(sys.stacked_dim());
    const Index nb = sys.block_complex_dim;
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        const double s = std::sqrt(sys.scale(e));
        x.segment(sys.offsets[e], nb) = s * blocks[e].real();
        x.segment(sys.offsets[e] + nb, nb) = s * blocks[e].imag();
    }
    return x;
}

VectorXd project_to_state(const GlobalSystem& sys, const SpectralField& spec,
                          double* nyquist_fraction) {
    const Box3D& box = sys.box;
    const int ni = box.grid.interior_count();
    const Index nb = sys.block_complex_dim;

    std::vector<VectorXcd> blocks(sys.entries.size());
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        const auto& ent = sys.entries[e];
        const int row = ((ent.kx + box.Nx) % box.Nx) * box.Nz + ((ent.kz + box.Nz) % box.Nz);
        VectorXcd q(nb);
        for (int j = 0; j < ni; ++j) {
            q[j] = spec.v_hat(row, j + 1);
            q[ni + j] = spec.eta_hat(row, j + 1);
        }
        blocks[e] = q;
    }

    if (nyquist_fraction) {
        const double peak = std::max(spec.v_hat.cwiseAbs().maxCoeff(),
                                     spec.eta_hat.cwiseAbs().maxCoeff());
        double ny_peak = 0.0;
        for (int kx = 0; kx < box.Nx; ++kx)
            for (int kz = 0; kz < box.Nz; ++kz)
                if (kx == box.Nx / 2 || kz == box.Nz / 2) {
                    const int row = kx * box.Nz + kz;
                    ny_peak = std::max(
                        {ny_peak, spec.v_hat.row(row).cwiseAbs().maxCoeff(),
                         spec.eta_hat.row(row).cwiseAbs().maxCoeff()});
                }
        *nyquist_fraction = peak > 0.0 ? ny_peak / peak : 0.0;
    }
    return stack(sys, blocks);
}

SpectralField state_to_spectral(const GlobalSystem& sys, const VectorXd& x) {
    const Box3D& box = sys.box;
    const int ny = box.grid.n_points;
    const int ni = box.grid.interior_count();

    SpectralField spec;
    spec.box = box;
    spec.v_hat = MatrixXcd::Zero(box.Nx * box.Nz, ny);
    spec.eta_hat = MatrixXcd::Zero(box.Nx * box.Nz, ny);

    const auto blocks = unstack(sys, x);
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        const auto& ent = sys.entries[e];
        const int row = ((ent.kx + box.Nx) % box.Nx) * box.Nz + ((ent.kz + box.Nz) % box.Nz);
        const int crow =
            ((box.Nx - ent.kx) % box.Nx) * box.Nz + ((box.Nz - ent.kz) % box.Nz);
        for (int j = 0; j < ni; ++j) {
            spec.v_hat(row, j + 1) = blocks[e][j];
            spec.eta_hat(row, j + 1) = blocks[e][ni + j];
            spec.v_hat(crow, j + 1) = std::conj(blocks[e][j]);
            spec.eta_hat(crow, j + 1) = std::conj(blocks[e][ni + j]);
        }
    }
    return spec;
}

namespace {

MatrixXd apply_blockwise(const GlobalSystem& sys, const MatrixXd& X,
                         const MatrixXcd& (*pick)(const channel::StateSpaceModel&)) {
    if (X.rows() != sys.stacked_dim()) throw DimensionMismatch("apply: bad state size");
    MatrixXd Y(X.rows(), X.cols());
    const Index nb = sys.block_complex_dim;
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        const MatrixXcd& A = pick(sys.blocks[e]);
        MatrixXcd q(nb, X.cols());
        q.real() = X.middleRows(sys.offsets[e], nb);
        q.imag() = X.middleRows(sys.offsets[e] + nb, nb);
        MatrixXcd aq = A * q;
        Y.middleRows(sys.offsets[e], nb) = aq.real();
        Y.middleRows(sys.offsets[e] + nb, nb) = aq.imag();
    }
    return Y;
}

const MatrixXcd& pick_a(const channel::StateSpaceModel& m) { return m.A; }
const MatrixXcd& pick_conv(const channel::StateSpaceModel& m) { return m.A_conv; }
const MatrixXcd& pick_diff(const channel::StateSpaceModel& m) { return m.A_diff; }

}  // namespace

MatrixXd apply_A(const GlobalSystem& sys, const MatrixXd& X) {
    return apply_blockwise(sys, X, pick_a);
}
MatrixXd apply_conv(const GlobalSystem& sys, const MatrixXd& X) {
    return apply_blockwise(sys, X, pick_conv);
}
MatrixXd apply_diff(const GlobalSystem& sys, const MatrixXd& X) {
    return apply_blockwise(sys, X, pick_diff);
}

balancing::SystemOps<double> global_ops(const GlobalSystem& sys, const VectorXd& b) {
    balancing::SystemOps<double> ops;
    ops.apply_A = [&sys](const MatrixXd& X) { return apply_A(sys, X); };
    ops.apply_conv = [&sys](const MatrixXd& X) { return apply_conv(sys, X); };
    ops.apply_diff = [&sys](const MatrixXd& X) { return apply_diff(sys, X); };
    ops.B = b;
    ops.reynolds = sys.reynolds;
    return ops;
}

BlockDiagWeight<double> m_weight(const GlobalSystem& sys) {
    std::vector<MatrixXd> blocks;
    blocks.reserve(2 * sys.entries.size());
    for (const auto& model : sys.blocks) {
        blocks.push_back(model.M_weight);  // real part
        blocks.push_back(model.M_weight);  // imaginary part
    }
    return BlockDiagWeight<double>(std::move(blocks));
}

BlockDiagWeight<double> e_weight(const GlobalSystem& sys) {
    std::vector<MatrixXd> blocks;
    blocks.reserve(2 * sys.entries.size());
    for (const auto& model : sys.blocks) {
        blocks.push_back(model.E_weight);
        blocks.push_back(model.E_weight);
    }
    return BlockDiagWeight<double>(std::move(blocks));
}

double state_energy(const GlobalSystem& sys, const VectorXd& x) {
    double total = 0.0;
    const Index nb = sys.block_complex_dim;
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        const auto re = x.segment(sys.offsets[e], nb);
        const auto im = x.segment(sys.offsets[e] + nb, nb);
        total += re.dot(sys.blocks[e].E_weight * re) + im.dot(sys.blocks[e].E_weight * im);
    }
    return total;
}

double streamwise_constant_fraction(const GlobalSystem& sys, const VectorXd& x) {
    double total = 0.0, constant = 0.0;
    const Index nb = sys.block_complex_dim;
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        const auto re = x.segment(sys.offsets[e], nb);
        const auto im = x.segment(sys.offsets[e] + nb, nb);
        const double energy =
            re.dot(sys.blocks[e].E_weight * re) + im.dot(sys.blocks[e].E_weight * im);
        total += energy;
        if (sys.entries[e].kx == 0) constant += energy;
    }
    return total > 0.0 ? constant / total : 0.0;
}

double stable_dt(const GlobalSystem& sys, double safety) {
    double dt = std::numeric_limits<double>::max();
    for (const auto& model : sys.blocks) {
        dt = std::min(dt, dynamics::stable_dt(model.A, safety));
    }
    return dt;
}

namespace {

// Chunked block stepping until the global energy drops below the threshold.
double decay_horizon_global(const GlobalSystem& sys, const VectorXd& x0,
                            const dynamics::ImpulseRunConfig& cfg, bool* decayed) {
    const double e0 = state_energy(sys, x0);
    const double target = cfg.decay_threshold * e0;
    const double chunk_t = std::max(64.0 * cfg.dt, cfg.t_max / 4096.0);
    const long chunk_steps = std::max(1L, std::lround(chunk_t / cfg.dt));

    std::vector<MatrixXcd> chunks;
    chunks.reserve(sys.blocks.size());
    for (const auto& model : sys.blocks) {
        MatrixXcd R = dynamics::rk4_step_matrix(model.A, cfg.dt);
        MatrixXcd C = MatrixXcd::Identity(R.rows(), R.cols());
        long m = chunk_steps;
        while (m > 0) {
            if (m & 1) C = C * R;
            R = R * R;
            m >>= 1;
        }
        chunks.push_back(std::move(C));
    }
    auto q = unstack(sys, x0);
    double t = 0.0;
    *decayed = true;
    while (t < cfg.t_max) {
        for (size_t e = 0; e < q.size(); ++e) q[e] = chunks[e] * q[e];
        t += chunk_steps * cfg.dt;
        if (state_energy(sys, stack(sys, q)) <= target) return t;
    }
    *decayed = false;
    return cfg.t_max;
}

}  // namespace

dynamics::SnapshotSetReal evolve_field(const GlobalSystem& sys, const VectorXd& x0,
                                       const dynamics::ImpulseRunConfig& cfg_in) {
    dynamics::ImpulseRunConfig cfg = cfg_in;
    if (cfg.dt <= 0.0) cfg.dt = stable_dt(sys);
    if (cfg.T <= 0.0) {
        bool decayed = true;
        cfg.T = decay_horizon_global(sys, x0, cfg, &decayed);
    }
    const VectorXd times =
        cfg.two_phase ? dynamics::two_phase_sample_times(cfg.T, cfg.snapshot_count,
                                                         cfg.fine_fraction,
                                                         cfg.fine_window, cfg.dt)
                      : dynamics::uniform_sample_times(cfg.T, cfg.snapshot_count, cfg.dt);

    const auto q0 = unstack(sys, x0);
    dynamics::SnapshotSetReal set;
    set.times = times;
    set.weights = dynamics::trapezoid_weights(times);
    set.kind = dynamics::SnapshotKind::direct;
    set.source = "field3d:impulse";
    set.data.resize(sys.stacked_dim(), times.size());

    const Index nb = sys.block_complex_dim;
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        auto block_run = dynamics::propagate(sys.blocks[e].A, q0[e], cfg.dt, times);
        const double s = std::sqrt(sys.scale(e));
        set.data.middleRows(sys.offsets[e], nb) = s * block_run.data.real();
        set.data.middleRows(sys.offsets[e] + nb, nb) = s * block_run.data.imag();
    }

    const double e0 = state_energy(sys, VectorXd(set.data.col(0) / std::sqrt(set.weights[0])));
    const double eT = state_energy(
        sys, VectorXd(set.data.col(times.size() - 1) / std::sqrt(set.weights[times.size() - 1])));
    if (eT > cfg.decay_threshold * e0) {
        set.decayed = false;
        set.warnings.push_back("terminal/initial energy = " + std::to_string(eT / e0) +
                               " above the declared threshold");
    }
    return set;
}

std::vector<dynamics::SnapshotSetReal> adjoint_impulse_runs(
    const GlobalSystem& sys, const modal::ModeBasisReal& pod_basis, int s,
    const dynamics::ImpulseRunConfig& cfg_in) {
    if (s < 1 || s > pod_basis.modes.cols()) {
        throw InvalidParameter("adjoint_impulse_runs: s exceeds basis size");
    }
    dynamics::ImpulseRunConfig cfg = cfg_in;
    if (cfg.dt <= 0.0) cfg.dt = stable_dt(sys);
    if (cfg.T <= 0.0) {
        throw InvalidParameter("adjoint_impulse_runs: a fixed horizon T is required");
    }
    const VectorXd times =
        cfg.two_phase ? dynamics::two_phase_sample_times(cfg.T, cfg.snapshot_count,
                                                         cfg.fine_fraction,
                                                         cfg.fine_window, cfg.dt)
                      : dynamics::uniform_sample_times(cfg.T, cfg.snapshot_count, cfg.dt);

    const Index nb = sys.block_complex_dim;
    std::vector<MatrixXcd> adjoints;
    adjoints.reserve(sys.blocks.size());
    for (const auto& model : sys.blocks) adjoints.push_back(channel::build_adjoint(model));

    std::vector<dynamics::SnapshotSetReal> runs;
    runs.reserve(s);
    for (int j = 0; j < s; ++j) {
        // z(0) = M^{-1} E theta_j, applied block by block.
        const auto theta = unstack(sys, VectorXd(pod_basis.modes.col(j)));
        dynamics::SnapshotSetReal run;
        run.times = times;
        run.weights = dynamics::trapezoid_weights(times);
        run.kind = dynamics::SnapshotKind::adjoint;
        run.source = "field3d:adjoint:pod_mode_" + std::to_string(j + 1);
        run.data.resize(sys.stacked_dim(), times.size());

        for (size_t e = 0; e < sys.entries.size(); ++e) {
            const auto& model = sys.blocks[e];
            Eigen::LLT<MatrixXd> llt(model.M_weight);
            VectorXcd z0(nb);
            VectorXcd etheta = real_times_complex(model.E_weight, MatrixXcd(theta[e]));
            z0.real() = llt.solve(etheta.real().eval());
            z0.imag() = llt.solve(etheta.imag().eval());
            auto block_run = dynamics::propagate(adjoints[e], z0, cfg.dt, times);
            const double sc = std::sqrt(sys.scale(e));
            run.data.middleRows(sys.offsets[e], nb) = sc * block_run.data.real();
            run.data.middleRows(sys.offsets[e] + nb, nb) = sc * block_run.data.imag();
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

analysis::TransferFn global_transfer(const GlobalSystem& sys, const VectorXd& b,
                                     const MatrixXd& output_map) {
    if (b.size() != sys.stacked_dim() || output_map.cols() != sys.stacked_dim()) {
        throw DimensionMismatch("global_transfer: shapes do not match the system");
    }
    // Copy what the closure needs; sys must outlive the returned function.
    return [&sys, b, output_map](double omega) -> MatrixXcd {
        const Index nb = sys.block_complex_dim;
        VectorXcd state(sys.stacked_dim());
        for (size_t e = 0; e < sys.entries.size(); ++e) {
            // Stacked-real blocks [p; q] map to zeta = p + i q, xi = p - i q:
            //   zeta = (i w I - A)^{-1} b_c,  xi = -conj((i w I + A)^{-1} b_c)
            VectorXcd bc(nb);
            bc.real() = b.segment(sys.offsets[e], nb);
            bc.imag() = b.segment(sys.offsets[e] + nb, nb);

            MatrixXcd lhs = -sys.blocks[e].A;
            lhs.diagonal().array() += kI * omega;
            const VectorXcd zeta = lhs.partialPivLu().solve(bc);

            MatrixXcd lhs2 = sys.blocks[e].A;
            lhs2.diagonal().array() += kI * omega;
            const VectorXcd xi = -(lhs2.partialPivLu().solve(bc)).conjugate();

            state.segment(sys.offsets[e], nb) = 0.5 * (zeta + xi);
            state.segment(sys.offsets[e] + nb, nb) = (zeta - xi) / (2.0 * kI);
        }
        MatrixXcd out(output_map.rows(), 1);
        out.col(0).real() = output_map * state.real();
        out.col(0).imag() = output_map * state.imag();
        return out;
    };
}

void write_slice_csv(const std::string& path, const Field3D& field, double y0) {
    int iy = 0;
    double best = std::numeric_limits<double>::max();
    for (int j = 0; j < field.box.grid.n_points; ++j) {
        const double d = std::abs(field.box.grid.points[j] - y0);
        if (d < best) {
            best = d;
            iy = j;
        }
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "x,z,v\n";
    char buf[96];
    for (int ix = 0; ix < field.box.Nx; ++ix) {
        for (int iz = 0; iz < field.box.Nz; ++iz) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n",
                          field.box.Lx * ix / field.box.Nx,
                          field.box.Lz * iz / field.box.Nz, field.v(ix * field.box.Nz + iz, iy));
            out << buf;
        }
    }
}

}  // namespace bpod::field3d
