#pragma once

#include "bpod/spectral.hpp"
#include "bpod/types.hpp"

namespace bpod::channel {

struct WavenumberPair {
    double alpha = 0.0;  // streamwise
    double beta = 0.0;   // spanwise

    double k2() const { return alpha * alpha + beta * beta; }
};

// Laminar profile U(y) = 1 - y^2 and derivatives, sampled on the full grid.
struct BaseFlow {
    VectorXd U;
    VectorXd Uprime;        // -2 y
    VectorXd Udoubleprime;  // -2
};

BaseFlow poiseuille(const spectral::Grid1D& grid);

// State q = (v, eta) on interior nodes for one wavenumber pair.
struct StateVector {
    VectorXcd v;
    VectorXcd eta;
};

// Dense single-wavenumber Orr-Sommerfeld/Squire model in state-space form,
// together with the discrete inner-product weights it is analyzed under.
// A = A_conv + (1/Re) A_diff holds exactly by assembly.
struct StateSpaceModel {
    spectral::Grid1D grid;
    WavenumberPair wavenumber;
    double reynolds = 0.0;

    MatrixXcd A;
    MatrixXcd A_conv;
    MatrixXcd A_diff;
    MatrixXcd B;  // input columns; empty until an input is attached

    // Discrete state inner product <q1, q2>_M = q1^H M q2 (real SPD), built
    // in integrated-by-parts form so that M = 2 k^2 E exactly.
    MatrixXd M_weight;
    MatrixXd E_weight;

    // Collocation pieces reused downstream.
    MatrixXd d1_full;      // (N+1) x (N+1)
    MatrixXd d2_interior;  // Dirichlet restriction
    MatrixXd d4_clamped;
    VectorXd quad;  // full-grid Clenshaw-Curtis weights

    Index state_dim() const { return A.rows(); }
    Index interior_count() const { return d2_interior.rows(); }
};

StateSpaceModel build_os_squire(const WavenumberPair& wn, double reynolds,
                                const spectral::Grid1D& grid);

// Discrete M-adjoint A+ = M^{-1} A^H M.
MatrixXcd build_adjoint(const StateSpaceModel& model);

// Collocation of the continuous adjoint equations (cross-check construction,
// with the U' d/dz coupling moved to the v-equation).
MatrixXcd build_adjoint_continuous(const StateSpaceModel& model);

VectorXcd pack_state(const StateVector& q);
StateVector unpack_state(const StateSpaceModel& model, const VectorXcd& x);

cdouble m_inner_product(const StateVector& q1, const StateVector& q2,
                        const StateSpaceModel& model);
cdouble energy_inner_product(const StateVector& q1, const StateVector& q2,
                             const StateSpaceModel& model);

double state_energy(const StateSpaceModel& model, const VectorXcd& x);

// (u, v, w) on the full grid, recovered from continuity and the definition of
// wall-normal vorticity.
struct Velocities {
    VectorXcd u, v, w;
};

Velocities recover_velocities(const StateVector& q, const WavenumberPair& wn,
                              const MatrixXd& d1_full);
Velocities recover_velocities(const StateVector& q, const StateSpaceModel& model);

struct GrowthCurve {
    VectorXd times;
    VectorXd growth;      // G(t) = max over unit-energy x0 of E(x(t))
    double peak_time = 0.0;
    double peak_growth = 0.0;
};

struct OptimalPerturbation {
    VectorXcd state;  // unit energy
    GrowthCurve curve;
};

// horizon > 0 optimizes at that time; horizon <= 0 sweeps for the global
// optimum.  Refuses (throws) for unstable models.
OptimalPerturbation optimal_perturbation(const StateSpaceModel& model, double horizon);

}  // namespace bpod::channel
