#pragma once

#include <string>
#include <vector>

#include "bpod/channel.hpp"
#include "bpod/modal_fwd.hpp"
#include "bpod/types.hpp"

namespace bpod::dynamics {

enum class SnapshotKind { direct, adjoint };

// Time-quadrature-weighted snapshot matrix: column j holds x(t_j) scaled by
// sqrt(weights[j]) so that X X^H approximates the integral of x x^H dt.
template <typename Scalar>
struct SnapshotSetT {
    MatrixX<Scalar> data;
    VectorXd times;
    VectorXd weights;  // trapezoidal weights on `times`
    SnapshotKind kind = SnapshotKind::direct;
    std::string source;
    bool decayed = true;
    std::vector<std::string> warnings;

    Index count() const { return data.cols(); }
    VectorX<Scalar> unscaled(Index j) const {
        return data.col(j) / std::sqrt(weights[j]);
    }
};

using SnapshotSet = SnapshotSetT<cdouble>;
using SnapshotSetReal = SnapshotSetT<double>;

VectorXd trapezoid_weights(const VectorXd& times);

// Sample times as exact multiples of dt.
VectorXd uniform_sample_times(double T, int count, double dt);
// First `fine_fraction` of the snapshots over the initial `fine_window` of the
// horizon, the remainder uniform.
VectorXd two_phase_sample_times(double T, int count, double fine_fraction,
                                double fine_window, double dt);

// One RK4 step matrix R(h A) = I + hA + ... + (hA)^4/24; m steps of classical
// RK4 on dx/dt = A x equal R^m applied to the state.
MatrixXcd rk4_step_matrix(const MatrixXcd& A, double h);

// Step size with |lambda|_max * dt = 2.5 * safety, from a power-iteration
// estimate of the spectral radius.
double stable_dt(const MatrixXcd& A, double safety = 0.5);

// RK4 trajectory of dx/dt = A x sampled at `sample_times` (which must be
// non-negative multiples of dt, strictly increasing).  Throws DivergenceError
// if the state norm exceeds 1e12 times the initial norm.
SnapshotSet propagate(const MatrixXcd& A, const VectorXcd& x0, double dt,
                      const VectorXd& sample_times);

struct ImpulseRunConfig {
    int snapshot_count = 500;
    double dt = 0.0;
    double T = 0.0;                 // > 0: fixed horizon; else decay-based
    double decay_threshold = 1e-4;  // terminal/initial energy
    double t_max = 5000.0;          // cap for the decay search
    bool two_phase = false;
    double fine_fraction = 0.25;
    double fine_window = 0.10;
};

// x(0) = b, run to the decay threshold (or fixed T), trapezoidal weighting.
SnapshotSet direct_impulse_snapshots(const channel::StateSpaceModel& model,
                                     const VectorXcd& b, const ImpulseRunConfig& cfg);

// One adjoint trajectory per retained POD mode, started from the columns of
// (Theta_s^+ C)^+ = M^{-1} E Theta_s.
std::vector<SnapshotSet> adjoint_impulse_snapshots(const channel::StateSpaceModel& model,
                                                   const modal::ModeBasis& pod_basis,
                                                   int s, const ImpulseRunConfig& cfg);

// Horizontal concatenation of snapshot sets (shared row dimension).
template <typename Scalar>
MatrixX<Scalar> stack_columns(const std::vector<SnapshotSetT<Scalar>>& sets) {
    if (sets.empty()) return MatrixX<Scalar>();
    Index cols = 0;
    for (const auto& s : sets) cols += s.data.cols();
    MatrixX<Scalar> out(sets.front().data.rows(), cols);
    Index at = 0;
    for (const auto& s : sets) {
        out.middleCols(at, s.data.cols()) = s.data;
        at += s.data.cols();
    }
    return out;
}

}  // namespace bpod::dynamics
