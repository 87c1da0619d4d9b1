#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bpod/channel.hpp"
#include "bpod/modal.hpp"
#include "bpod/types.hpp"
#include "bpod/weights.hpp"

namespace bpod::balancing {

enum class Provenance { pod, bpod, exact_bt };

// Reduced (A_r, B_r, C_r) with the separately projected convective/diffusive
// parts for Reynolds continuation.  `recon` lifts the output vector back to a
// full-state representation (POD-coefficient outputs: columns of Theta_s; for
// full-state outputs it is the identity-equivalent basis).
struct ReducedOrderModel {
    MatrixXcd Ar, Br, Cr;
    MatrixXcd Ar_conv, Ar_diff;
    MatrixXcd recon;  // n x q lift of outputs to the state space
    int rank = 0;
    int output_rank = 0;
    double design_Re = 0.0;
    Provenance provenance = Provenance::pod;
    std::vector<std::string> warnings;
};

struct GramianPair {
    MatrixXcd Wc, Wo;
    VectorXd hsv;
    double residual_c = 0.0;  // ||A Wc + Wc A^H + B B^H|| / ||B B^H||
    double residual_o = 0.0;
};

// Snapshot-based balancing: SVD of Y^H M X, Phi = X V S^{-1/2},
// Psi = Y U S^{-1/2}.  Columns of X/Y carry the time-quadrature scaling.
template <typename Scalar>
modal::ModeBasisT<Scalar> bpod(const MatrixX<Scalar>& X, const MatrixX<Scalar>& Y,
                               const WeightOp<Scalar>& M, int r,
                               double svd_tol = 1e-10);

// Linear-operator hooks so that ROM assembly works for dense single-wavenumber
// models and for the block-diagonal physical-space system alike.
template <typename Scalar>
struct SystemOps {
    std::function<MatrixX<Scalar>(const MatrixX<Scalar>&)> apply_A;
    std::function<MatrixX<Scalar>(const MatrixX<Scalar>&)> apply_conv;
    std::function<MatrixX<Scalar>(const MatrixX<Scalar>&)> apply_diff;
    MatrixX<Scalar> B;
    double reynolds = 0.0;
};

SystemOps<cdouble> dense_ops(const channel::StateSpaceModel& model);
SystemOps<cdouble> dense_ops(const MatrixXcd& A, const MatrixXcd& A_conv,
                             const MatrixXcd& A_diff, const MatrixXcd& B,
                             double reynolds);

// Petrov-Galerkin / Galerkin projection onto a mode basis.  For pod kind the
// test functions are W phi_j with W the weight the basis is orthonormal
// under; for balancing kind they are M psi_j (adjoint modes).  output_map is
// the s x n measurement operator (e.g. Theta_s^H E); recon its lift.
template <typename Scalar>
ReducedOrderModel reduce(const SystemOps<Scalar>& ops,
                         const modal::ModeBasisT<Scalar>& basis,
                         const WeightOp<Scalar>& W, int r,
                         const MatrixX<Scalar>& output_map,
                         const MatrixX<Scalar>& recon);

struct ExactBtResult {
    ReducedOrderModel rom;
    GramianPair gramians;
    MatrixXcd phi, psi;  // balancing and adjoint transformations (n x r)
};

// Dense balanced-truncation oracle: Lyapunov solves for the Gramians with the
// standard-transpose adjoint and the energy-weighted output (C^H C = E), then
// the square-root balancing transformation.  Factor once, truncate at any rank.
class ExactBtSolver {
  public:
    ExactBtSolver(const MatrixXcd& A, const MatrixXcd& A_conv, const MatrixXcd& A_diff,
                  double reynolds, const MatrixXcd& B, const MatrixXd& output_weight);

    const GramianPair& gramians() const { return gramians_; }
    Index numerical_rank() const { return p_; }

    MatrixXcd phi(int r) const;
    MatrixXcd psi(int r) const;

    // output_map/recon as in reduce(); empty output_map keeps the full-state
    // output C_r = Phi_r.
    ReducedOrderModel truncate(int r, const MatrixXcd& output_map = MatrixXcd(),
                               const MatrixXcd& recon = MatrixXcd()) const;

  private:
    MatrixXcd A_conv_, A_diff_, B_;
    double reynolds_ = 0.0;
    GramianPair gramians_;
    MatrixXcd lc_v_, lo_u_;  // Lc V and Lo U from the cross-factor SVD
    Index p_ = 0;            // count of Hankel values above tolerance
};

ExactBtResult exact_balanced_truncation(const channel::StateSpaceModel& model,
                                        const MatrixXcd& B, int r,
                                        const MatrixXcd& output_map = MatrixXcd(),
                                        const MatrixXcd& recon = MatrixXcd());

// Hankel singular values through the M-weighted adjoint route: Sylvester
// solves for G_c and G_o with A+ = M^{-1} A^H M, then sqrt(eig(G_c G_o)).
VectorXd hsv_weighted_adjoint(const channel::StateSpaceModel& model, const MatrixXcd& B);

}  // namespace bpod::balancing
