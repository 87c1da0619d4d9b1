#include "bpod/dynamics.hpp"

#include <cmath>
#include <map>
#include <random>

#include <Eigen/Dense>

#include "bpod/modal.hpp"

namespace bpod::dynamics {

VectorXd trapezoid_weights(const VectorXd& times) {
    const Index m = times.size();
    if (m < 2) throw InvalidParameter("trapezoid_weights: need at least two samples");
    VectorXd w(m);
    w[0] = 0.5 * (times[1] - times[0]);
    for (Index j = 1; j + 1 < m; ++j) w[j] = 0.5 * (times[j + 1] - times[j - 1]);
    w[m - 1] = 0.5 * (times[m - 1] - times[m - 2]);
    return w;
}

VectorXd uniform_sample_times(double T, int count, double dt) {
    if (count < 2 || T <= 0.0 || dt <= 0.0) {
        throw InvalidParameter("uniform_sample_times: bad schedule parameters");
    }
    // Round the interval up so the schedule covers [0, T].
    const long steps_per = std::max(1L, long(std::ceil(T / (count - 1) / dt - 1e-9)));
    VectorXd t(count);
    for (int j = 0; j < count; ++j) t[j] = double(j) * steps_per * dt;
    return t;
}

VectorXd two_phase_sample_times(double T, int count, double fine_fraction,
                                double fine_window, double dt) {
    if (count < 4 || T <= 0.0 || dt <= 0.0 || fine_fraction <= 0.0 ||
        fine_fraction >= 1.0 || fine_window <= 0.0 || fine_window >= 1.0) {
        throw InvalidParameter("two_phase_sample_times: bad schedule parameters");
    }
    const int n_fine = std::max(2, int(std::lround(count * fine_fraction)));
    const int n_coarse = count - n_fine;
    const double t_split = T * fine_window;

    const long fine_steps = std::max(1L, std::lround(t_split / n_fine / dt));
    VectorXd t(count);
    for (int j = 0; j < n_fine; ++j) t[j] = double(j) * fine_steps * dt;
    const double t0 = t[n_fine - 1];
    const long coarse_steps =
        std::max(1L, long(std::ceil((T - t0) / n_coarse / dt - 1e-9)));
    for (int j = 0; j < n_coarse; ++j)
        t[n_fine + j] = t0 + double(j + 1) * coarse_steps * dt;
    return t;
}

MatrixXcd rk4_step_matrix(const MatrixXcd& A, double h) {
    const Index n = A.rows();
    MatrixXcd P = MatrixXcd::Identity(n, n) + (h / 4.0) * A;
    P = MatrixXcd::Identity(n, n) + (h / 3.0) * (A * P);
    P = MatrixXcd::Identity(n, n) + (h / 2.0) * (A * P);
    return MatrixXcd::Identity(n, n) + h * (A * P);
}

double stable_dt(const MatrixXcd& A, double safety) {
    const Index n = A.rows();
    VectorXcd v(n);
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> dist;
    for (Index j = 0; j < n; ++j) v[j] = cdouble(dist(rng), dist(rng));
    v /= v.norm();
    double rho = 0.0;
    for (int it = 0; it < 60; ++it) {
        VectorXcd w = A * v;
        rho = w.norm();
        if (rho == 0.0) break;
        v = w / rho;
    }
    if (rho <= 0.0) throw NumericalError("stable_dt: spectral radius estimate failed");
    return safety * 2.5 / (1.05 * rho);
}

namespace {

// R^m by binary powering; callers cache per distinct gap.
MatrixXcd matrix_power(const MatrixXcd& R, long m) {
    MatrixXcd result = MatrixXcd::Identity(R.rows(), R.cols());
    MatrixXcd base = R;
    while (m > 0) {
        if (m & 1) result = result * base;
        base = base * base;
        m >>= 1;
    }
    return result;
}

long steps_for_gap(double gap, double dt) {
    const long m = std::lround(gap / dt);
    if (m < 0 || std::abs(m * dt - gap) > 1e-9 * std::max(1.0, std::abs(gap))) {
        throw InvalidParameter("propagate: dt must divide the sampling intervals");
    }
    return m;
}

}  // namespace

SnapshotSet propagate(const MatrixXcd& A, const VectorXcd& x0, double dt,
                      const VectorXd& sample_times) {
    if (dt <= 0.0) throw InvalidParameter("propagate: dt must be positive");
    const Index m = sample_times.size();
    if (m < 2) throw InvalidParameter("propagate: need at least two sample times");
    for (Index j = 1; j < m; ++j) {
        if (sample_times[j] <= sample_times[j - 1]) {
            throw InvalidParameter("propagate: sample times must be strictly increasing");
        }
    }
    if (sample_times[0] < 0.0) {
        throw InvalidParameter("propagate: sample times must be non-negative");
    }

    const MatrixXcd R = rk4_step_matrix(A, dt);
    std::map<long, MatrixXcd> transitions;
    auto transition = [&](long steps) -> const MatrixXcd& {
        auto it = transitions.find(steps);
        if (it == transitions.end()) {
            it = transitions.emplace(steps, matrix_power(R, steps)).first;
        }
        return it->second;
    };

    SnapshotSet set;
    set.times = sample_times;
    set.weights = trapezoid_weights(sample_times);
    set.data.resize(x0.size(), m);

    const double limit = 1e12 * std::max(x0.norm(), 1e-300);
    VectorXcd x = x0;
    if (sample_times[0] > 0.0) {
        x = transition(steps_for_gap(sample_times[0], dt)) * x;
    }
    for (Index j = 0; j < m; ++j) {
        if (j > 0) {
            const long steps = steps_for_gap(sample_times[j] - sample_times[j - 1], dt);
            x = transition(steps) * x;
        }
        if (!x.allFinite() || x.norm() > limit) {
            throw DivergenceError(
                "propagate: trajectory norm blew up (unstable system or dt too large)");
        }
        set.data.col(j) = std::sqrt(set.weights[j]) * x;
    }
    return set;
}

namespace {

// Find the horizon at which the E-energy has decayed below the threshold by
// chunked stepping; returns t_max (and clears *decayed) if it never does.
double decay_horizon(const channel::StateSpaceModel& model, const VectorXcd& b,
                     const ImpulseRunConfig& cfg, bool* decayed) {
    const double e0 = channel::state_energy(model, b);
    const double target = cfg.decay_threshold * e0;
    const double chunk_t = std::max(64.0 * cfg.dt, cfg.t_max / 4096.0);
    const long chunk_steps = std::max(1L, std::lround(chunk_t / cfg.dt));

    MatrixXcd R = rk4_step_matrix(model.A, cfg.dt);
    MatrixXcd C = matrix_power(R, chunk_steps);
    VectorXcd x = b;
    double t = 0.0;
    *decayed = true;
    while (t < cfg.t_max) {
        x = C * x;
        t += chunk_steps * cfg.dt;
        if (!x.allFinite() || x.norm() > 1e12 * std::max(b.norm(), 1e-300)) {
            throw DivergenceError("direct_impulse_snapshots: trajectory blew up");
        }
        if (channel::state_energy(model, x) <= target) return t;
    }
    *decayed = false;
    return cfg.t_max;
}

VectorXd build_sample_times(double T, const ImpulseRunConfig& cfg) {
    if (cfg.two_phase) {
        return two_phase_sample_times(T, cfg.snapshot_count, cfg.fine_fraction,
                                      cfg.fine_window, cfg.dt);
    }
    return uniform_sample_times(T, cfg.snapshot_count, cfg.dt);
}

}  // namespace

SnapshotSet direct_impulse_snapshots(const channel::StateSpaceModel& model,
                                     const VectorXcd& b, const ImpulseRunConfig& cfg) {
    if (cfg.dt <= 0.0) throw InvalidParameter("direct_impulse_snapshots: dt required");
    if (b.size() != model.state_dim()) {
        throw DimensionMismatch("direct_impulse_snapshots: input column size mismatch");
    }

    bool decayed = true;
    double T = cfg.T;
    if (T <= 0.0) {
        T = decay_horizon(model, b, cfg, &decayed);
    }

    SnapshotSet set = propagate(model.A, b, cfg.dt, build_sample_times(T, cfg));
    set.kind = SnapshotKind::direct;
    set.source = "impulse:B";
    set.decayed = decayed;

    const double e0 = channel::state_energy(model, set.unscaled(0));
    const double eT = channel::state_energy(model, set.unscaled(set.count() - 1));
    // Small slack: the sampled horizon is dt-aligned, so the last snapshot can
    // sit a hair before the chunked decay detection point.
    if (cfg.T <= 0.0 && eT > 1.1 * cfg.decay_threshold * e0) decayed = false;
    if (!decayed) {
        set.decayed = false;
        set.warnings.push_back("response not decayed to threshold at t_max; terminal/initial energy = " +
                               std::to_string(eT / e0));
    }
    return set;
}

std::vector<SnapshotSet> adjoint_impulse_snapshots(const channel::StateSpaceModel& model,
                                                   const modal::ModeBasis& pod_basis,
                                                   int s, const ImpulseRunConfig& cfg) {
    if (s < 1 || s > pod_basis.modes.cols()) {
        throw InvalidParameter("adjoint_impulse_snapshots: s exceeds basis size");
    }
    const MatrixXcd adjoint = channel::build_adjoint(model);

    // z_j(0) = (Theta_s^+ C)^+ e_j = M^{-1} E theta_j with all weights applied.
    const MatrixXcd theta = pod_basis.modes.leftCols(s);
    MatrixXcd z0 = real_times_complex(model.E_weight, theta);
    Eigen::LLT<MatrixXd> llt(model.M_weight);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("adjoint_impulse_snapshots: M weight not positive definite");
    }
    MatrixXcd ic(z0.rows(), z0.cols());
    ic.real() = llt.solve(z0.real().eval());
    ic.imag() = llt.solve(z0.imag().eval());

    double T = cfg.T;
    bool decayed = true;
    if (T <= 0.0) {
        // Adjoint spectrum is the conjugate of the direct one; reuse the
        // direct decay horizon of the first initial condition.
        channel::StateSpaceModel adj_model = model;
        adj_model.A = adjoint;
        T = decay_horizon(adj_model, ic.col(0), cfg, &decayed);
    }
    const VectorXd times = build_sample_times(T, cfg);

    std::vector<SnapshotSet> runs;
    runs.reserve(s);
    for (int j = 0; j < s; ++j) {
        SnapshotSet run = propagate(adjoint, ic.col(j), cfg.dt, times);
        run.kind = SnapshotKind::adjoint;
        run.source = "adjoint:pod_mode_" + std::to_string(j + 1);
        run.decayed = decayed;
        if (!decayed) run.warnings.push_back("adjoint run not decayed at t_max");
        runs.push_back(std::move(run));
    }
    return runs;
}

}  // namespace bpod::dynamics
