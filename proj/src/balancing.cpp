#include "bpod/balancing.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "bpod/linalg.hpp"

namespace bpod::balancing {

template <typename Scalar>
modal::ModeBasisT<Scalar> bpod(const MatrixX<Scalar>& X, const MatrixX<Scalar>& Y,
                               const WeightOp<Scalar>& M, int r, double svd_tol) {
    if (X.rows() != Y.rows() || X.rows() != M.dim()) {
        throw DimensionMismatch("bpod: snapshot matrices do not conform with M");
    }
    MatrixX<Scalar> H = Y.adjoint() * M.apply(X);
    Eigen::BDCSVD<MatrixX<Scalar>> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);

    const VectorXd& sigma = svd.singularValues();
    Index p = 0;
    while (p < sigma.size() && sigma[p] > svd_tol * sigma[0]) ++p;

    modal::ModeBasisT<Scalar> basis;
    basis.kind = modal::BasisKind::balancing;
    basis.weight_id = modal::WeightId::m_weight;

    Index keep = p;
    if (r > 0 && r < p) keep = r;
    if (r > p) {
        keep = p;
        basis.rank_truncated = true;
        basis.warnings.push_back("bpod: requested rank " + std::to_string(r) +
                                 " exceeds numerical rank " + std::to_string(p));
    }
    if (keep < sigma.size() && keep > 0 &&
        sigma[keep] > (1.0 - 1e-2) * sigma[keep - 1]) {
        basis.warnings.push_back(
            "bpod: cut at nearly equal singular values sigma_r ~ sigma_{r+1}; "
            "stability guarantee void");
    }

    basis.values = sigma.head(p);
    const VectorXd inv_root = sigma.head(keep).array().rsqrt();
    basis.modes = X * svd.matrixV().leftCols(keep) * inv_root.asDiagonal();
    basis.adjoint_modes = Y * svd.matrixU().leftCols(keep) * inv_root.asDiagonal();
    return basis;
}

template modal::ModeBasisT<double> bpod<double>(const MatrixX<double>&,
                                                const MatrixX<double>&,
                                                const WeightOp<double>&, int, double);
template modal::ModeBasisT<cdouble> bpod<cdouble>(const MatrixX<cdouble>&,
                                                  const MatrixX<cdouble>&,
                                                  const WeightOp<cdouble>&, int, double);

SystemOps<cdouble> dense_ops(const MatrixXcd& A, const MatrixXcd& A_conv,
                             const MatrixXcd& A_diff, const MatrixXcd& B,
                             double reynolds) {
    SystemOps<cdouble> ops;
    ops.apply_A = [A](const MatrixXcd& X) { return MatrixXcd(A * X); };
    ops.apply_conv = [A_conv](const MatrixXcd& X) { return MatrixXcd(A_conv * X); };
    ops.apply_diff = [A_diff](const MatrixXcd& X) { return MatrixXcd(A_diff * X); };
    ops.B = B;
    ops.reynolds = reynolds;
    return ops;
}

SystemOps<cdouble> dense_ops(const channel::StateSpaceModel& model) {
    return dense_ops(model.A, model.A_conv, model.A_diff, model.B, model.reynolds);
}

namespace {

MatrixXcd to_complex(const MatrixXd& X) { return X.cast<cdouble>(); }
const MatrixXcd& to_complex(const MatrixXcd& X) { return X; }

}  // namespace

template <typename Scalar>
ReducedOrderModel reduce(const SystemOps<Scalar>& ops,
                         const modal::ModeBasisT<Scalar>& basis,
                         const WeightOp<Scalar>& W, int r,
                         const MatrixX<Scalar>& output_map,
                         const MatrixX<Scalar>& recon) {
    if (r < 1 || r > basis.rank()) {
        throw InvalidParameter("reduce: rank outside the available basis");
    }
    const MatrixX<Scalar> phi = basis.modes.leftCols(r);

    MatrixX<Scalar> test;  // r x n, the projection row space
    if (basis.kind == modal::BasisKind::balancing) {
        if (basis.adjoint_modes.cols() < r) {
            throw InvalidParameter("reduce: balancing basis is missing adjoint modes");
        }
        test = W.apply(basis.adjoint_modes.leftCols(r)).adjoint();
    } else {
        test = W.apply(phi).adjoint();
    }

    ReducedOrderModel rom;
    rom.rank = r;
    rom.design_Re = ops.reynolds;
    rom.provenance =
        basis.kind == modal::BasisKind::balancing ? Provenance::bpod : Provenance::pod;
    rom.warnings = basis.warnings;

    rom.Ar_conv = to_complex(MatrixX<Scalar>(test * ops.apply_conv(phi)));
    rom.Ar_diff = to_complex(MatrixX<Scalar>(test * ops.apply_diff(phi)));
    rom.Ar = rom.Ar_conv + (1.0 / ops.reynolds) * rom.Ar_diff;
    rom.Br = to_complex(MatrixX<Scalar>(test * ops.B));
    if (output_map.size() > 0) {
        rom.Cr = to_complex(MatrixX<Scalar>(output_map * phi));
        rom.recon = to_complex(recon);
    } else {
        rom.Cr = to_complex(phi);
        rom.recon = MatrixXcd();
    }
    rom.output_rank = int(rom.Cr.rows());
    return rom;
}

template ReducedOrderModel reduce<double>(const SystemOps<double>&,
                                          const modal::ModeBasisT<double>&,
                                          const WeightOp<double>&, int,
                                          const MatrixX<double>&, const MatrixX<double>&);
template ReducedOrderModel reduce<cdouble>(const SystemOps<cdouble>&,
                                           const modal::ModeBasisT<cdouble>&,
                                           const WeightOp<cdouble>&, int,
                                           const MatrixX<cdouble>&,
                                           const MatrixX<cdouble>&);

ExactBtSolver::ExactBtSolver(const MatrixXcd& A, const MatrixXcd& A_conv,
                             const MatrixXcd& A_diff, double reynolds,
                             const MatrixXcd& B, const MatrixXd& output_weight)
    : A_conv_(A_conv), A_diff_(A_diff), B_(B), reynolds_(reynolds) {
    const Index n = A.rows();
    if (n > 600) {
        throw InvalidParameter("ExactBtSolver: dense solves limited to n <= 600");
    }
    if (B.rows() != n || output_weight.rows() != n) {
        throw DimensionMismatch("ExactBtSolver: B/output weight rows");
    }
    {
        Eigen::ComplexEigenSolver<MatrixXcd> ces(A, false);
        if (ces.eigenvalues().real().maxCoeff() >= 0.0) {
            throw InvalidParameter("ExactBtSolver: model unstable, Gramians undefined");
        }
    }

    // A Wc + Wc A^H + B B^H = 0 and A^H Wo + Wo A + E = 0; the plain-transpose
    // adjoint on the state with the energy inner product on the output.
    const MatrixXcd BBh = B * B.adjoint();
    const MatrixXcd E = output_weight.cast<cdouble>();
    gramians_.Wc = linalg::solve_lyapunov(A, BBh);
    gramians_.Wo = linalg::solve_lyapunov(A.adjoint(), E);
    gramians_.residual_c = linalg::lyapunov_residual(A, gramians_.Wc, BBh) / BBh.norm();
    gramians_.residual_o =
        linalg::lyapunov_residual(A.adjoint(), gramians_.Wo, E) / E.norm();

    // Square-root method: factor both Gramians, SVD the cross factor.
    const MatrixXcd Lc = linalg::psd_factor(gramians_.Wc);
    const MatrixXcd Lo = linalg::psd_factor(gramians_.Wo);
    Eigen::BDCSVD<MatrixXcd> svd(Lo.adjoint() * Lc,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
    gramians_.hsv = svd.singularValues();
    while (p_ < gramians_.hsv.size() && gramians_.hsv[p_] > 1e-10 * gramians_.hsv[0]) ++p_;
    lc_v_ = Lc * svd.matrixV().leftCols(p_);
    lo_u_ = Lo * svd.matrixU().leftCols(p_);
}

MatrixXcd ExactBtSolver::phi(int r) const {
    return lc_v_.leftCols(r) * gramians_.hsv.head(r).array().rsqrt().matrix().asDiagonal();
}

MatrixXcd ExactBtSolver::psi(int r) const {
    return lo_u_.leftCols(r) * gramians_.hsv.head(r).array().rsqrt().matrix().asDiagonal();
}

ReducedOrderModel ExactBtSolver::truncate(int r, const MatrixXcd& output_map,
                                          const MatrixXcd& recon) const {
    ReducedOrderModel rom;
    if (r > p_) {
        rom.warnings.push_back("exact_bt: rank truncated to numerical rank " +
                               std::to_string(p_));
        r = int(p_);
    }
    if (r < 1) throw InvalidParameter("ExactBtSolver: rank must be >= 1");
    if (r < gramians_.hsv.size() &&
        gramians_.hsv[r] > (1.0 - 1e-2) * gramians_.hsv[r - 1]) {
        rom.warnings.push_back("exact_bt: cut between nearly equal Hankel singular values");
    }

    const MatrixXcd P = phi(r);
    const MatrixXcd Q = psi(r);
    rom.rank = r;
    rom.design_Re = reynolds_;
    rom.provenance = Provenance::exact_bt;
    rom.Ar_conv = Q.adjoint() * A_conv_ * P;
    rom.Ar_diff = Q.adjoint() * A_diff_ * P;
    rom.Ar = rom.Ar_conv + (1.0 / reynolds_) * rom.Ar_diff;
    rom.Br = Q.adjoint() * B_;
    if (output_map.size() > 0) {
        rom.Cr = output_map * P;
        rom.recon = recon;
    } else {
        rom.Cr = P;
        rom.recon = MatrixXcd();
    }
    rom.output_rank = int(rom.Cr.rows());
    return rom;
}

ExactBtResult exact_balanced_truncation(const channel::StateSpaceModel& model,
                                        const MatrixXcd& B, int r,
                                        const MatrixXcd& output_map,
                                        const MatrixXcd& recon) {
    ExactBtSolver solver(model.A, model.A_conv, model.A_diff, model.reynolds, B,
                         model.E_weight);
    ExactBtResult result;
    result.rom = solver.truncate(r, output_map, recon);
    result.gramians = solver.gramians();
    result.phi = solver.phi(result.rom.rank);
    result.psi = solver.psi(result.rom.rank);
    return result;
}

VectorXd hsv_weighted_adjoint(const channel::StateSpaceModel& model, const MatrixXcd& B) {
    // Weighted-adjoint Gramians from their own Sylvester equations:
    //   A Gc + Gc A+ = -B B+,   A+ Go + Go A = -C+ C,
    // with A+ = M^{-1} A^H M, B+ = B^H M, C+ C = M^{-1} E.  Since M pulls out
    // of the Gramian integrals, Gc M^{-1} and M Go are the Hermitian Gramians
    // of the plain-transpose route; the Hankel values follow by the same
    // square-root method so the two routes differ only in the linear solves.
    const MatrixXcd M = model.M_weight.cast<cdouble>();
    const MatrixXcd A_plus = channel::build_adjoint(model);

    const MatrixXcd BBp = B * (B.adjoint() * M);
    const MatrixXcd Gc = linalg::solve_sylvester(model.A, A_plus, -BBp);

    Eigen::LLT<MatrixXd> llt(model.M_weight);
    MatrixXd CpC_real = llt.solve(model.E_weight);
    const MatrixXcd Go =
        linalg::solve_sylvester(A_plus, model.A, -CpC_real.cast<cdouble>());

    MatrixXcd minv_gch(Gc.rows(), Gc.cols());
    minv_gch.real() = llt.solve(Gc.adjoint().real().eval());
    minv_gch.imag() = llt.solve(Gc.adjoint().imag().eval());
    MatrixXcd Wc = minv_gch.adjoint();  // Gc M^{-1}
    MatrixXcd Wo = real_times_complex(model.M_weight, Go);
    Wc = 0.5 * (Wc + Wc.adjoint()).eval();
    Wo = 0.5 * (Wo + Wo.adjoint()).eval();

    const MatrixXcd Lc = linalg::psd_factor(Wc);
    const MatrixXcd Lo = linalg::psd_factor(Wo);
    Eigen::BDCSVD<MatrixXcd> svd(Lo.adjoint() * Lc);
    return svd.singularValues();
}

}  // namespace bpod::balancing
