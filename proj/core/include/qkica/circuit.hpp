#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>

#include "qkica/gram.hpp"
#include "qkica/types.hpp"

namespace qkica {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Registers, most significant first: A (n), B (n), C (s), D (1), then one
// flag qubit, or two when split_flag is set.
struct CircuitLayout {
    int n = 1;
    int s = 8;
    // Separate flags for the input and output projections. With a single
    // shared flag the block also picks up the grand-mean term.
    bool split_flag = true;

    static constexpr int kMaxQubits = 17;

    int flag_qubits() const { return split_flag ? 2 : 1; }
    int total_qubits() const { return 2 * n + s + 1 + flag_qubits(); }
    Index dim() const { return Index{1} << total_qubits(); }
    Index samples() const { return Index{1} << n; }
    void validate() const;
};

// Fixed point on the scale 2^s - 1, so 0 and 1 are both exact.
int quantize_kernel(double k, int s);
double dequantize_kernel(int q, int s);

// |j>|k>|c> -> |j>|k>|c xor q(K(z_j, z_k))> on 2n + s qubits.
SparseMatrix build_oracle_unitary(const Vector& z, const CircuitLayout& layout,
                                  const KernelSpec& kernel);

class BlockEncoding {
public:
    BlockEncoding(CircuitLayout layout, std::vector<SparseMatrix> gates)
        : layout_(layout), gates_(std::move(gates)) {}

    const CircuitLayout& layout() const { return layout_; }
    // Applied right to left: gates()[0] acts first.
    const std::vector<SparseMatrix>& gates() const { return gates_; }

    Vector apply(const Vector& x) const;
    // Basis index of |k, 0, 0, 0, flags = 1>.
    Index block_index(Index k) const;
    // N x N matrix of <j,0,1|U|k,0,1>.
    Matrix extract_block() const;
    // Max entry of G^T G - I over the individual gates.
    double gate_unitarity_residual() const;
    // Max entry of V^T U^T U V - V^T V over random unit probe columns V.
    double probe_unitarity_residual(int probes, std::uint64_t seed) const;
    // Full product; only for small layouts.
    SparseMatrix assemble() const;

private:
    CircuitLayout layout_;
    std::vector<SparseMatrix> gates_;
};

// C_F2 . H_B . SWAP_AB . O . CR . O . H_B . C_F1, where C_F flips flag F when
// register A is in the uniform state (single-flag layouts reuse F1).
BlockEncoding build_block_encoding(const Vector& z, const CircuitLayout& layout,
                                   const KernelSpec& kernel);

struct CircuitReport {
    // max_jk |N <j,0,1|U|k,0,1> - (K)_jk| against the exact centered Gram.
    double max_block_deviation = 0.0;
    double unitarity_residual = 0.0;
    int qubits = 0;
};

CircuitReport verify_block_encoding(const Vector& z, const CircuitLayout& layout,
                                    const KernelSpec& kernel, std::uint64_t seed = 0);

} // namespace qkica
