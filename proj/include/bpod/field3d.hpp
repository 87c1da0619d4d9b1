#pragma once

#include <vector>

#include "bpod/analysis.hpp"
#include "bpod/channel.hpp"
#include "bpod/dynamics.hpp"
#include "bpod/weights.hpp"

namespace bpod::field3d {

// Periodic box, 2*pi x 2*pi in x and z for the paper configuration.
struct Box3D {
    double Lx = 0.0, Lz = 0.0;
    int Nx = 0, Nz = 0;
    spectral::Grid1D grid;
};

Box3D make_box(int Nx, int N_wall_normal, int Nz, double Lx = 2.0 * 3.14159265358979323846,
               double Lz = 2.0 * 3.14159265358979323846);

// Real (v, eta) data; row index ix * Nz + iz, one column per y node.
struct Field3D {
    Box3D box;
    MatrixXd v;
    MatrixXd eta;
};

// Full spectral planes (conjugate-symmetric, exact round trip), same layout
// with row index kx_idx * Nz + kz_idx.
struct SpectralField {
    Box3D box;
    MatrixXcd v_hat;
    MatrixXcd eta_hat;
};

// v(x,y,z) = A (1 - r^2/a^2) exp(-r^2/a^2 - y^2/ay^2) (cos(pi y) + 1) about the
// domain center; eta = 0.
Field3D gaussian_actuator(const Box3D& box, double amplitude, double alpha_r,
                          double alpha_y);

// 2-D DFT per y plane.  to_spectral rejects fields whose horizontal mean
// ((0,0) coefficient) exceeds 1e-10 of the peak coefficient.
SpectralField to_spectral(const Field3D& field);
Field3D from_spectral(const SpectralField& spec);

// One independent (non-mean, non-Nyquist) wavenumber pair of the half
// spectrum; the conjugate partner carries the same content, accounted for by
// pair_weight = 2.
struct WavenumberEntry {
    int kx = 0, kz = 0;
    channel::WavenumberPair wn;
    double pair_weight = 2.0;
};

// Block-diagonal evolution operator over the independent wavenumber set; the
// stacked real state is [sqrt(s_e) Re(q_e); sqrt(s_e) Im(q_e)] per entry with
// s_e = pair_weight * Lx * Lz, so global inner products are plain weighted
// dot products of stacked vectors.
struct GlobalSystem {
    Box3D box;
    double reynolds = 0.0;
    std::vector<WavenumberEntry> entries;
    std::vector<channel::StateSpaceModel> blocks;
    std::vector<Index> offsets;  // entries.size() + 1, in stacked-real indices
    Index block_complex_dim = 0;  // 2 * interior_count

    Index stacked_dim() const { return offsets.back(); }
    double scale(size_t e) const { return entries[e].pair_weight * box.Lx * box.Lz; }
};

GlobalSystem build_global_system(const Box3D& box, double reynolds);

// Degenerate one-entry system: the real field of a single wavenumber pair
// Re{q(y) e^{i(ax + bz)}}, stacked exactly like the 3-D case so snapshot
// analyses count modes the way the physical-space data does (each complex
// mode is a traveling pair).
GlobalSystem single_wavenumber_system(const channel::WavenumberPair& wn, double reynolds,
                                      const spectral::Grid1D& grid);

std::vector<VectorXcd> unstack(const GlobalSystem& sys, const VectorXd& x);
VectorXd stack(const GlobalSystem& sys, const std::vector<VectorXcd>& blocks);

// SpectralField -> stacked state (drops Nyquist content; the dropped peak
// fraction is returned through *nyquist_fraction when non-null).
VectorXd project_to_state(const GlobalSystem& sys, const SpectralField& spec,
                          double* nyquist_fraction = nullptr);
SpectralField state_to_spectral(const GlobalSystem& sys, const VectorXd& x);

// Global inner-product weights (block-diagonal, real SPD).
BlockDiagWeight<double> m_weight(const GlobalSystem& sys);
BlockDiagWeight<double> e_weight(const GlobalSystem& sys);

MatrixXd apply_A(const GlobalSystem& sys, const MatrixXd& X);
MatrixXd apply_conv(const GlobalSystem& sys, const MatrixXd& X);
MatrixXd apply_diff(const GlobalSystem& sys, const MatrixXd& X);
balancing::SystemOps<double> global_ops(const GlobalSystem& sys, const VectorXd& b);

double state_energy(const GlobalSystem& sys, const VectorXd& x);
// Fraction of perturbation energy in the streamwise-constant (kx = 0) modes.
double streamwise_constant_fraction(const GlobalSystem& sys, const VectorXd& x);

// Largest stable RK4 step over all blocks.
double stable_dt(const GlobalSystem& sys, double safety = 0.5);

// Block-diagonal impulse evolution; cfg.dt <= 0 selects stable_dt().
dynamics::SnapshotSetReal evolve_field(const GlobalSystem& sys, const VectorXd& x0,
                                       const dynamics::ImpulseRunConfig& cfg);

// One adjoint trajectory per retained mode of the (real, stacked) POD basis.
std::vector<dynamics::SnapshotSetReal> adjoint_impulse_runs(
    const GlobalSystem& sys, const modal::ModeBasisReal& pod_basis, int s,
    const dynamics::ImpulseRunConfig& cfg);

// H(i w) of the stacked system with input b (stacked) and real output map.
analysis::TransferFn global_transfer(const GlobalSystem& sys, const VectorXd& b,
                                     const MatrixXd& output_map);

// (x, z, v) slice of the wall-normal velocity at the y node closest to y0.
void write_slice_csv(const std::string& path, const Field3D& field, double y0);

}  // namespace bpod::field3d
