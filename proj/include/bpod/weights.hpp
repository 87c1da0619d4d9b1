#pragma once

#include <memory>
#include <vector>

#include "bpod/types.hpp"

namespace bpod {

// Inner-product weight W (real SPD) applied to real or complex data:
// <x, y>_W = x^H (W y).
template <typename Scalar>
struct WeightOp {
    virtual ~WeightOp() = default;
    virtual Index dim() const = 0;
    virtual MatrixX<Scalar> apply(const MatrixX<Scalar>& X) const = 0;

    Scalar inner(const VectorX<Scalar>& x, const VectorX<Scalar>& y) const {
        return (x.adjoint() * apply(y))(0, 0);
    }
    double norm(const VectorX<Scalar>& x) const {
        return std::sqrt(std::abs(inner(x, x)));
    }
};

template <typename Scalar>
struct IdentityWeight final : WeightOp<Scalar> {
    Index n;
    explicit IdentityWeight(Index dim) : n(dim) {}
    Index dim() const override { return n; }
    MatrixX<Scalar> apply(const MatrixX<Scalar>& X) const override { return X; }
};

template <typename Scalar>
struct DenseWeight final : WeightOp<Scalar> {
    MatrixXd W;
    explicit DenseWeight(MatrixXd weight) : W(std::move(weight)) {}
    Index dim() const override { return W.rows(); }
    MatrixX<Scalar> apply(const MatrixX<Scalar>& X) const override {
        if (X.rows() != W.rows()) throw DimensionMismatch("DenseWeight: row mismatch");
        return real_times_complex(W, X);
    }
};

// Block-diagonal real weight (used for the stacked physical-space states).
template <typename Scalar>
struct BlockDiagWeight final : WeightOp<Scalar> {
    std::vector<MatrixXd> blocks;
    std::vector<Index> offsets;  // blocks.size() + 1 entries

    explicit BlockDiagWeight(std::vector<MatrixXd> blks) : blocks(std::move(blks)) {
        offsets.resize(blocks.size() + 1);
        offsets[0] = 0;
        for (size_t i = 0; i < blocks.size(); ++i)
            offsets[i + 1] = offsets[i] + blocks[i].rows();
    }
    Index dim() const override { return offsets.back(); }
    MatrixX<Scalar> apply(const MatrixX<Scalar>& X) const override {
        if (X.rows() != dim()) throw DimensionMismatch("BlockDiagWeight: row mismatch");
        MatrixX<Scalar> Y(X.rows(), X.cols());
        for (size_t i = 0; i < blocks.size(); ++i) {
            const Index r = blocks[i].rows();
            Y.middleRows(offsets[i], r) = real_times_complex(
                blocks[i], MatrixX<Scalar>(X.middleRows(offsets[i], r)));
        }
        return Y;
    }
};

}  // namespace bpod
