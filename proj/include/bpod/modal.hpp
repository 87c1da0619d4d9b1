#pragma once

#include <string>
#include <vector>

#include "bpod/dynamics.hpp"
#include "bpod/modal_fwd.hpp"
#include "bpod/types.hpp"
#include "bpod/weights.hpp"

namespace bpod::modal {

enum class WeightId { identity, m_weight, energy };
enum class BasisKind { pod, balancing };

template <typename Scalar>
struct ModeBasisT {
    MatrixX<Scalar> modes;          // n x r
    MatrixX<Scalar> adjoint_modes;  // n x r (balancing kind only)
    VectorXd values;                // POD eigenvalues or Hankel singular values
    double total_energy = 0.0;      // trace of the snapshot Gramian (POD kind)
    WeightId weight_id = WeightId::identity;
    BasisKind kind = BasisKind::pod;
    bool rank_truncated = false;
    std::vector<std::string> warnings;

    Index rank() const { return modes.cols(); }
    // Fraction of snapshot energy carried by the leading r values.
    double energy_fraction(Index r) const {
        double s = 0.0;
        for (Index j = 0; j < std::min(r, values.size()); ++j) s += values[j];
        return total_energy > 0.0 ? s / total_energy : 0.0;
    }
};

// POD by the method of snapshots: eigendecomposition of X^H W X.  Columns of
// X carry the time-quadrature scaling already.  Modes with eigenvalues below
// rank_tol * lambda_1 are dropped; if fewer than max_modes survive, the basis
// is truncated and flagged.
template <typename Scalar>
ModeBasisT<Scalar> pod(const MatrixX<Scalar>& snapshots, const WeightOp<Scalar>& W,
                       int max_modes = -1, double rank_tol = 1e-12);

template <typename Scalar>
ModeBasisT<Scalar> pod(const dynamics::SnapshotSetT<Scalar>& snapshots,
                       const WeightOp<Scalar>& W, int max_modes = -1,
                       double rank_tol = 1e-12) {
    return pod<Scalar>(snapshots.data, W, max_modes, rank_tol);
}

// Output projection onto the leading s POD modes; map = Theta_s^H W is the
// full-state-to-coefficients operator (Theta_s^+ C with C = I).
template <typename Scalar>
struct OutputProjectionT {
    MatrixX<Scalar> theta;  // n x s
    MatrixX<Scalar> map;    // s x n

    Index rank() const { return theta.cols(); }
    MatrixX<Scalar> project(const MatrixX<Scalar>& y) const { return theta * (map * y); }
};

using OutputProjection = OutputProjectionT<cdouble>;
using OutputProjectionReal = OutputProjectionT<double>;

template <typename Scalar>
OutputProjectionT<Scalar> output_projection(const ModeBasisT<Scalar>& basis,
                                            const WeightOp<Scalar>& W, int s);

}  // namespace bpod::modal
