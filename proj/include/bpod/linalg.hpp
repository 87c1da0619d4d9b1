#pragma once

#include <functional>

#include "bpod/types.hpp"

namespace bpod::linalg {

// Solve A X + X B = C by Bartels-Stewart (complex Schur of A and B).
MatrixXcd solve_sylvester(const MatrixXcd& A, const MatrixXcd& B, const MatrixXcd& C);

// Solve A X + X A^H + Q = 0 for Hermitian Q; the result is Hermitian.
MatrixXcd solve_lyapunov(const MatrixXcd& A, const MatrixXcd& Q);

double lyapunov_residual(const MatrixXcd& A, const MatrixXcd& X, const MatrixXcd& Q);

// Factor a Hermitian PSD matrix as W = L L^H via an eigendecomposition with
// small negative eigenvalues clipped to zero.
MatrixXcd psd_factor(const MatrixXcd& W, double rel_tol = 1e-13);
MatrixXd psd_factor(const MatrixXd& W, double rel_tol = 1e-13);

// e^{A t} applied through the eigendecomposition of A (A diagonalizable).
class EigPropagator {
  public:
    explicit EigPropagator(const MatrixXcd& A);

    const VectorXcd& eigenvalues() const { return lambda_; }
    double max_real_part() const;

    MatrixXcd propagator(double t) const;               // e^{A t}
    MatrixXcd apply(double t, const MatrixXcd& X) const;  // e^{A t} X

  private:
    VectorXcd lambda_;
    MatrixXcd vectors_;
    MatrixXcd inverse_vectors_;
};

// Maximize a unimodal scalar function on [a, b] by golden-section search;
// returns the abscissa of the maximum.
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol);

}  // namespace bpod::linalg
