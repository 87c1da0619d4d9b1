#include "bpod/modal.hpp"

#include <Eigen/Dense>

namespace bpod::modal {

template <typename Scalar>
ModeBasisT<Scalar> pod(const MatrixX<Scalar>& snapshots, const WeightOp<Scalar>& W,
                       int max_modes, double rank_tol) {
    if (snapshots.cols() < 1) throw InvalidParameter("pod: empty snapshot set");
    if (snapshots.rows() != W.dim()) {
        throw DimensionMismatch("pod: snapshot rows do not match the weight dimension");
    }

    MatrixX<Scalar> gram = snapshots.adjoint() * W.apply(snapshots);
    gram = Scalar(0.5) * (gram + gram.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(gram);
    if (es.info() != Eigen::Success) throw NumericalError("pod: eigensolver failed");

    const Index m = gram.rows();
    ModeBasisT<Scalar> basis;
    basis.kind = BasisKind::pod;
    basis.total_energy = std::real(gram.trace());

    // Ascending from Eigen; keep descending eigenvalues above the tolerance.
    const double lmax = std::max(es.eigenvalues()(m - 1), 0.0);
    Index rank = 0;
    for (Index i = m - 1; i >= 0; --i) {
        if (es.eigenvalues()(i) > rank_tol * lmax && es.eigenvalues()(i) > 0.0) {
            ++rank;
        } else {
            break;
        }
    }
    if (max_modes > 0 && rank > max_modes) rank = max_modes;
    if (max_modes > 0 && rank < max_modes) {
        basis.rank_truncated = true;
        basis.warnings.push_back("pod: requested " + std::to_string(max_modes) +
                                 " modes, numerical rank is " + std::to_string(rank));
    }

    basis.values.resize(rank);
    basis.modes.resize(snapshots.rows(), rank);
    for (Index j = 0; j < rank; ++j) {
        const Index src = m - 1 - j;
        basis.values[j] = es.eigenvalues()(src);
        basis.modes.col(j) =
            snapshots * es.eigenvectors().col(src) / std::sqrt(basis.values[j]);
    }

    // Cholesky-QR polish: the lifted modes of near-degenerate or tiny
    // eigenvalues lose a few digits of W-orthonormality otherwise.
    if (rank > 0) {
        MatrixX<Scalar> G = basis.modes.adjoint() * W.apply(basis.modes);
        Eigen::LLT<MatrixX<Scalar>> llt(Scalar(0.5) * (G + G.adjoint()));
        if (llt.info() == Eigen::Success) {
            MatrixX<Scalar> R = llt.matrixL().adjoint();
            basis.modes =
                R.template triangularView<Eigen::Upper>()
                    .template solve<Eigen::OnTheRight>(basis.modes);
        }
    }
    return basis;
}

template ModeBasisT<double> pod<double>(const MatrixX<double>&, const WeightOp<double>&,
                                        int, double);
template ModeBasisT<cdouble> pod<cdouble>(const MatrixX<cdouble>&,
                                          const WeightOp<cdouble>&, int, double);

template <typename Scalar>
OutputProjectionT<Scalar> output_projection(const ModeBasisT<Scalar>& basis,
                                            const WeightOp<Scalar>& W, int s) {
    if (s < 1 || s > basis.rank()) {
        throw InvalidParameter("output_projection: s exceeds the basis rank");
    }
    OutputProjectionT<Scalar> proj;
    proj.theta = basis.modes.leftCols(s);
    proj.map = W.apply(proj.theta).adjoint();
    return proj;
}

template OutputProjectionT<double> output_projection<double>(const ModeBasisT<double>&,
                                                             const WeightOp<double>&, int);
template OutputProjectionT<cdouble> output_projection<cdouble>(const ModeBasisT<cdouble>&,
                                                               const WeightOp<cdouble>&,
                                                               int);

}  // namespace bpod::modal
