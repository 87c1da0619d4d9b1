#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bpod/balancing.hpp"
#include "bpod/types.hpp"
#include "bpod/weights.hpp"

namespace bpod::analysis {

struct FrequencyResponse {
    VectorXd omegas;
    VectorXd sigma_max;
    std::vector<int> failed;  // indices of frequencies where the solve failed
};

struct ErrorReport {
    double two_norm_rel = 0.0;
    double hinf_est = 0.0;
    double hsv_lower = 0.0;  // sigma_{r+1}
    double hsv_upper = 0.0;  // 2 sum_{j>r} sigma_j
    int rank = 0;
};

using TransferFn = std::function<MatrixXcd(double omega)>;

// H(i w) = C (i w I - A)^{-1} B by dense solves.
TransferFn dense_transfer(const MatrixXcd& A, const MatrixXcd& B, const MatrixXcd& C);

VectorXd log_grid(double w_lo, double w_hi, int count);

FrequencyResponse frequency_response(const TransferFn& H, const VectorXd& omegas);
FrequencyResponse frequency_response(const MatrixXcd& A, const MatrixXcd& B,
                                     const MatrixXcd& C, const VectorXd& omegas);

// Peak of sigma_max(H) over the sweep, refined by golden-section search
// around the discrete maximum.
double hinf_norm(const TransferFn& H, const VectorXd& omegas,
                 double* omega_at_peak = nullptr);

// Precomputed transfer values over a sweep, shared across many error norms
// against the same full system.
struct SweepCache {
    VectorXd omegas;
    std::vector<MatrixXcd> values;
};
SweepCache sweep_transfer(const TransferFn& H, const VectorXd& omegas);

// Relative time-quadrature L2 error between two output series on shared
// sample times (columns are outputs at each time).
double impulse_error_2norm(const MatrixXcd& y_full, const MatrixXcd& y_rom,
                           const VectorXd& times);
double impulse_error_2norm(const MatrixXd& y_full, const MatrixXd& y_rom,
                           const VectorXd& times);

// Error report against the BT bounds; hsv are the oracle Hankel values.
ErrorReport hinf_error(const TransferFn& H_full, const TransferFn& H_rom,
                       const VectorXd& hsv, int rank, const VectorXd& omegas,
                       double two_norm_rel = 0.0);
ErrorReport hinf_error(const TransferFn& H_full, const SweepCache& full_cache,
                       const TransferFn& H_rom, const VectorXd& hsv, int rank,
                       double two_norm_rel = 0.0);

// Eigenvalues sorted by descending real part.
std::vector<cdouble> spectrum(const MatrixXcd& A);
double max_real_eigenvalue(const MatrixXcd& A);

balancing::ReducedOrderModel reynolds_continuation(
    const balancing::ReducedOrderModel& rom, double reynolds_new);

// T = trace(P_A P_B P_A) with W-orthogonal projectors onto the two spans.
template <typename Scalar>
double subspace_trace(const MatrixX<Scalar>& basis_a, const MatrixX<Scalar>& basis_b,
                      const WeightOp<Scalar>& W);

enum class ProjectionMode { orthogonal, petrov };

// ||P_r B||_W / ||B||_W for the orthogonal projector onto the leading modes or
// the Petrov projector Phi_r Psi_r^H M (which may exceed one).
template <typename Scalar>
double input_projection_norm(const modal::ModeBasisT<Scalar>& basis, int r,
                             const VectorX<Scalar>& b, const WeightOp<Scalar>& W,
                             ProjectionMode mode,
                             const WeightOp<Scalar>* M = nullptr);

// CSV emitters (deterministic formatting).
struct NamedSeries {
    std::string label;
    VectorXd values;
};

void write_freq_response_csv(const std::string& path, const VectorXd& omegas,
                             const std::vector<NamedSeries>& systems);
void write_error_norms_csv(const std::string& path,
                           const std::vector<ErrorReport>& reports,
                           const std::vector<std::string>& labels);
void write_spectrum_csv(const std::string& path,
                        const std::vector<std::pair<std::string, std::vector<cdouble>>>&
                            labeled_spectra);
void write_energy_csv(const std::string& path, const VectorXd& times,
                      const std::vector<NamedSeries>& systems);
void write_trace_csv(const std::string& path, const std::vector<int>& ranks,
                     const VectorXd& traces);
void write_values_csv(const std::string& path, const VectorXd& values,
                      double total_energy);

}  // namespace bpod::analysis
