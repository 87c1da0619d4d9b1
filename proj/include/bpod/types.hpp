#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bpod {

using cdouble = std::complex<double>;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : NumericalError {
    using NumericalError::NumericalError;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Product of a real weight matrix with a real or complex block, without
// promoting the weight to complex storage.
template <typename Derived>
auto real_times_complex(const MatrixXd& W, const Eigen::MatrixBase<Derived>& X) {
    if constexpr (std::is_same_v<typename Derived::Scalar, double>) {
        return MatrixXd(W * X);
    } else {
        MatrixXcd Y(W.rows(), X.cols());
        Y.real() = W * X.real();
        Y.imag() = W * X.imag();
        return Y;
    }
}

}  // namespace bpod
