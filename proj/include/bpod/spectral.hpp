#pragma once

#include "bpod/types.hpp"

namespace bpod::spectral {

// Chebyshev Gauss-Lobatto grid on [-1, 1], points descending from +1 to -1.
struct Grid1D {
    int n_points = 0;  // N + 1
    VectorXd points;

    int order() const { return n_points - 1; }          // N
    int interior_count() const { return n_points - 2; }  // N - 1
};

enum class BoundaryTreatment { none, clamped };

struct DiffOperator {
    int order = 0;
    BoundaryTreatment boundary = BoundaryTreatment::none;
    // (N+1) x (N+1) for boundary = none, (N-1) x (N-1) for clamped.
    MatrixXd matrix;
};

struct Quadrature {
    VectorXd weights;  // one per node, sum to 2
};

// N must be even and >= 2.
Grid1D chebyshev_grid(int N);

// Collocation differentiation matrix of the given order (1, 2 or 4).
// The clamped variant is only valid for order 4; it acts on interior nodal
// values of functions with f(+-1) = f'(+-1) = 0 and returns an interior-node
// matrix built by basis recombination with the (1 - y^2) weight.
DiffOperator diff_matrix(const Grid1D& grid, int order,
                         BoundaryTreatment boundary = BoundaryTreatment::none);

// Clenshaw-Curtis weights on the Gauss-Lobatto nodes.
Quadrature quadrature_weights(const Grid1D& grid);

// Full set of derivative matrices D^1..D^4 (Weideman-Reddy recursion with the
// negative-sum trick), used by the operator assembly.
std::array<MatrixXd, 4> derivative_matrices(const Grid1D& grid);

}  // namespace bpod::spectral
