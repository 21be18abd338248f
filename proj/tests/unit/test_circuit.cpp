#include <gtest/gtest.h>

#include <cmath>

#include "qkica/circuit.hpp"
#include "qkica/error.hpp"
#include "qkica/rng.hpp"

using namespace qkica;

namespace {

Vector random_z(Index n, std::uint64_t seed) {
    CounterRng rng(seed);
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = rng.normal();
    return z;
}

CircuitLayout layout(int n, int s, bool split = true) {
    CircuitLayout l;
    l.n = n;
    l.s = s;
    l.split_flag = split;
    return l;
}

} // namespace

TEST(Layout, QubitCount) {
    EXPECT_EQ(layout(1, 8).total_qubits(), 2 + 8 + 1 + 2);
    EXPECT_EQ(layout(3, 8).total_qubits(), 17);
    EXPECT_EQ(layout(3, 8, false).total_qubits(), 16);
    EXPECT_NO_THROW(layout(3, 8).validate());
    EXPECT_THROW(layout(4, 8).validate(), InvalidArgument);
    EXPECT_THROW(layout(0, 8).validate(), InvalidArgument);
}

TEST(Quantize, EndpointsExact) {
    for (int s : {1, 4, 8, 12}) {
        EXPECT_EQ(dequantize_kernel(quantize_kernel(0.0, s), s), 0.0);
        EXPECT_EQ(dequantize_kernel(quantize_kernel(1.0, s), s), 1.0);
    }
    EXPECT_EQ(quantize_kernel(1.5, 4), 15);
    EXPECT_EQ(quantize_kernel(-0.1, 4), 0);
}

TEST(Quantize, HalfStepError) {
    CounterRng rng(1);
    for (int s : {3, 8}) {
        const double step = 1.0 / (std::ldexp(1.0, s) - 1.0);
        for (int t = 0; t < 500; ++t) {
            const double k = rng.uniform();
            EXPECT_LE(std::abs(dequantize_kernel(quantize_kernel(k, s), s) - k), 0.5 * step + 1e-15);
        }
    }
}

TEST(Oracle, PermutationAndInvolution) {
    const CircuitLayout l = layout(1, 4);
    const Vector z = random_z(2, 2);
    const SparseMatrix o = build_oracle_unitary(z, l, KernelSpec{});
    ASSERT_EQ(o.rows(), 4 * 16);
    const Matrix dense = Matrix(o);
    EXPECT_LE((dense * dense - Matrix::Identity(64, 64)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(dense.colwise().sum(), Eigen::RowVectorXd::Ones(64));
    // The diagonal kernel value 1 quantizes to all ones in the C register.
    EXPECT_EQ(dense(15, 0), 1.0);
}

TEST(Oracle, LengthMismatch) {
    EXPECT_THROW(build_oracle_unitary(random_z(3, 1), layout(1, 4), KernelSpec{}), InvalidArgument);
}

TEST(BlockEncoding, TwoPointExample) {
    Vector z(2);
    z << 0.0, 1.0;
    const BlockEncoding be = build_block_encoding(z, layout(1, 8), KernelSpec{});
    const Matrix block = be.extract_block();
    const double c = (1.0 - std::exp(-1.0)) / 4.0;
    const Matrix want = (Matrix(2, 2) << c, -c, -c, c).finished();
    EXPECT_LE((block - want).cwiseAbs().maxCoeff(), std::ldexp(1.0, -7));
}

TEST(BlockEncoding, ConstantSamplesGiveZeroBlock) {
    const Vector z = Vector::Constant(4, 0.7);
    const BlockEncoding be = build_block_encoding(z, layout(2, 6), KernelSpec{});
    EXPECT_LE(be.extract_block().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BlockEncoding, GatesUnitary) {
    const BlockEncoding be = build_block_encoding(random_z(4, 3), layout(2, 4), KernelSpec{});
    EXPECT_LE(be.gate_unitarity_residual(), 1e-12);
    EXPECT_LE(be.probe_unitarity_residual(4, 1), 1e-12);
    const Matrix u = Matrix(be.assemble());
    EXPECT_LE((u.transpose() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BlockEncoding, AssembledMatchesApply) {
    const BlockEncoding be = build_block_encoding(random_z(2, 4), layout(1, 3), KernelSpec{});
    const Matrix u = Matrix(be.assemble());
    CounterRng rng(5);
    Vector x(u.cols());
    for (Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
    EXPECT_LE((u * x - be.apply(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BlockEncoding, QuantizationBound) {
    for (int s : {4, 8}) {
        for (int n : {1, 2, 3}) {
            const CircuitReport r = verify_block_encoding(random_z(Index{1} << n, 6 + n), layout(n, s), KernelSpec{});
            const double nd = std::ldexp(1.0, n);
            EXPECT_LE(r.max_block_deviation, 2.0 * std::ldexp(1.0, -s) * nd) << "n=" << n << " s=" << s;
            EXPECT_LE(r.unitarity_residual, 1e-10);
            EXPECT_EQ(r.qubits, 2 * n + s + 3);
        }
    }
}

TEST(BlockEncoding, SharedFlagPicksUpGrandMean) {
    // One shared flag leaves the grand-mean term in the block, so the split
    // layout is the one that reproduces the centered Gram.
    const Vector z = random_z(4, 9);
    const CircuitReport split = verify_block_encoding(z, layout(2, 10, true), KernelSpec{});
    const CircuitReport shared = verify_block_encoding(z, layout(2, 10, false), KernelSpec{});
    EXPECT_LT(split.max_block_deviation, 0.01);
    EXPECT_GT(shared.max_block_deviation, split.max_block_deviation);
}
