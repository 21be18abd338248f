#include "qkica/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "qkica/error.hpp"
#include "qkica/rng.hpp"

namespace qkica {

namespace {

using Triplet = Eigen::Triplet<double>;

// Basis index fields for the block-encoding register order.
struct Fields {
    Index a = 0;
    Index b = 0;
    Index c = 0;
    Index d = 0;
    Index f = 0;
};

class Codec {
public:
    explicit Codec(const CircuitLayout& l)
        : nf_(l.flag_qubits()), s_(l.s), n_(l.n) {}

    Fields decode(Index idx) const {
        Fields x;
        x.f = idx & ((Index{1} << nf_) - 1);
        idx >>= nf_;
        x.d = idx & 1;
        idx >>= 1;
        x.c = idx & ((Index{1} << s_) - 1);
        idx >>= s_;
        x.b = idx & ((Index{1} << n_) - 1);
        idx >>= n_;
        x.a = idx;
        return x;
    }

    Index encode(const Fields& x) const {
        Index idx = x.a;
        idx = (idx << n_) | x.b;
        idx = (idx << s_) | x.c;
        idx = (idx << 1) | x.d;
        idx = (idx << nf_) | x.f;
        return idx;
    }

    // Bit of flag F1 or F2 inside the flag field.
    Index flag_bit(int which) const { return (which == 1 || nf_ == 1) ? Index{1} << (nf_ - 1) : Index{1}; }

private:
    int nf_;
    int s_;
    int n_;
};

template <class ColumnFn>
SparseMatrix gate_from_columns(Index dim, Index per_column, ColumnFn fn) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(dim * per_column));
    for (Index col = 0; col < dim; ++col) fn(col, t);
    SparseMatrix g(dim, dim);
    g.setFromTriplets(t.begin(), t.end());
    g.makeCompressed();
    return g;
}

std::vector<int> quantized_table(const Vector& z, const CircuitLayout& layout, const KernelSpec& kernel) {
    const Index n = layout.samples();
    std::vector<int> q(static_cast<std::size_t>(n * n));
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b)
            q[static_cast<std::size_t>(a * n + b)] = quantize_kernel(kernel_eval(kernel, z(a), z(b)), layout.s);
    return q;
}

void check_inputs(const Vector& z, const CircuitLayout& layout, const KernelSpec& kernel) {
    layout.validate();
    kernel.validate();
    if (z.size() != layout.samples())
        throw InvalidArgument("sample vector length must equal 2^n = " + std::to_string(layout.samples()));
}

double max_abs_minus_identity(const SparseMatrix& p) {
    double worst = 0.0;
    std::vector<bool> seen_diag(static_cast<std::size_t>(p.cols()), false);
    for (Index c = 0; c < p.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(p, c); it; ++it) {
            double v = it.value();
            if (it.row() == it.col()) {
                v -= 1.0;
                seen_diag[static_cast<std::size_t>(c)] = true;
            }
            worst = std::max(worst, std::abs(v));
        }
    }
    for (bool s : seen_diag)
        if (!s) worst = std::max(worst, 1.0);
    return worst;
}

} // namespace

void CircuitLayout::validate() const {
    if (n < 1 || s < 1) throw InvalidArgument("circuit layout needs n >= 1 and s >= 1");
    if (s > 30) throw InvalidArgument("circuit layout supports at most 30 fraction bits");
    if (total_qubits() > kMaxQubits)
        throw InvalidArgument("circuit needs " + std::to_string(total_qubits()) + " qubits, cap is " +
                              std::to_string(kMaxQubits));
}

int quantize_kernel(double k, int s) {
    const double top = std::ldexp(1.0, s) - 1.0;
    const double q = std::round(std::clamp(k, 0.0, 1.0) * top);
    return static_cast<int>(q);
}

double dequantize_kernel(int q, int s) { return static_cast<double>(q) / (std::ldexp(1.0, s) - 1.0); }

SparseMatrix build_oracle_unitary(const Vector& z, const CircuitLayout& layout, const KernelSpec& kernel) {
    check_inputs(z, layout, kernel);
    const Index n = layout.samples();
    const Index cs = Index{1} << layout.s;
    const std::vector<int> q = quantized_table(z, layout, kernel);
    return gate_from_columns(n * n * cs, 1, [&](Index col, std::vector<Triplet>& t) {
        const Index c = col % cs;
        const Index ab = col / cs;
        const Index out = ab * cs + (c ^ static_cast<Index>(q[static_cast<std::size_t>(ab)]));
        t.emplace_back(out, col, 1.0);
    });
}

BlockEncoding build_block_encoding(const Vector& z, const CircuitLayout& layout, const KernelSpec& kernel) {
    check_inputs(z, layout, kernel);
    const Codec codec(layout);
    const Index dim = layout.dim();
    const Index n = layout.samples();
    const double nd = static_cast<double>(n);
    const double h = 1.0 / std::sqrt(nd);
    const double top = std::ldexp(1.0, layout.s) - 1.0;
    const std::vector<int> q = quantized_table(z, layout, kernel);

    // Flips the chosen flag when register A is in the uniform superposition:
    // I (x) I + Pi (x) (X - I) with Pi = |+><+|.
    auto controlled_flag = [&](int which) {
        const Index bit = codec.flag_bit(which);
        return gate_from_columns(dim, 2 * n, [&](Index col, std::vector<Triplet>& t) {
            Fields x = codec.decode(col);
            const Index a0 = x.a;
            for (Index a = 0; a < n; ++a) {
                x.a = a;
                const double stay = (a == a0 ? 1.0 : 0.0) - 1.0 / nd;
                if (stay != 0.0) t.emplace_back(codec.encode(x), col, stay);
                Fields y = x;
                y.f ^= bit;
                t.emplace_back(codec.encode(y), col, 1.0 / nd);
            }
        });
    };
    auto hadamard_b = [&] {
        return gate_from_columns(dim, n, [&](Index col, std::vector<Triplet>& t) {
            Fields x = codec.decode(col);
            const Index b0 = x.b;
            for (Index b = 0; b < n; ++b) {
                x.b = b;
                const int parity = std::popcount(static_cast<std::uint64_t>(b0 & b)) & 1;
                t.emplace_back(codec.encode(x), col, parity ? -h : h);
            }
        });
    };
    auto oracle = [&] {
        return gate_from_columns(dim, 1, [&](Index col, std::vector<Triplet>& t) {
            Fields x = codec.decode(col);
            x.c ^= static_cast<Index>(q[static_cast<std::size_t>(x.a * n + x.b)]);
            t.emplace_back(codec.encode(x), col, 1.0);
        });
    };
    auto rotation = [&] {
        return gate_from_columns(dim, 2, [&](Index col, std::vector<Triplet>& t) {
            Fields x = codec.decode(col);
            const double ca = static_cast<double>(x.c) / top;
            const double sa = std::sqrt(std::max(0.0, 1.0 - ca * ca));
            Fields y0 = x;
            y0.d = 0;
            Fields y1 = x;
            y1.d = 1;
            if (x.d == 0) {
                t.emplace_back(codec.encode(y0), col, ca);
                t.emplace_back(codec.encode(y1), col, sa);
            } else {
                t.emplace_back(codec.encode(y0), col, -sa);
                t.emplace_back(codec.encode(y1), col, ca);
            }
        });
    };
    auto swap_ab = [&] {
        return gate_from_columns(dim, 1, [&](Index col, std::vector<Triplet>& t) {
            Fields x = codec.decode(col);
            std::swap(x.a, x.b);
            t.emplace_back(codec.encode(x), col, 1.0);
        });
    };

    std::vector<SparseMatrix> gates;
    gates.push_back(controlled_flag(1));
    gates.push_back(hadamard_b());
    gates.push_back(oracle());
    gates.push_back(rotation());
    gates.push_back(oracle());
    gates.push_back(swap_ab());
    gates.push_back(hadamard_b());
    gates.push_back(controlled_flag(2));
    return BlockEncoding(layout, std::move(gates));
}

Vector BlockEncoding::apply(const Vector& x) const {
    Vector v = x;
    for (const auto& g : gates_) v = g * v;
    return v;
}

Index BlockEncoding::block_index(Index k) const {
    const Codec codec(layout_);
    Fields x;
    x.a = k;
    x.f = (Index{1} << layout_.flag_qubits()) - 1;
    return codec.encode(x);
}

Matrix BlockEncoding::extract_block() const {
    const Index n = layout_.samples();
    Matrix block(n, n);
    for (Index k = 0; k < n; ++k) {
        Vector e = Vector::Zero(layout_.dim());
        e(block_index(k)) = 1.0;
        const Vector out = apply(e);
        for (Index j = 0; j < n; ++j) block(j, k) = out(block_index(j));
    }
    return block;
}

double BlockEncoding::gate_unitarity_residual() const {
    double worst = 0.0;
    for (const auto& g : gates_) {
        const SparseMatrix p = SparseMatrix(g.transpose()) * g;
        worst = std::max(worst, max_abs_minus_identity(p));
    }
    return worst;
}

double BlockEncoding::probe_unitarity_residual(int probes, std::uint64_t seed) const {
    const Index dim = layout_.dim();
    Matrix v(dim, probes);
    CounterRng rng(seed, {0x70726F6265ULL});
    for (Index c = 0; c < probes; ++c) {
        for (Index r = 0; r < dim; ++r) v(r, c) = rng.normal();
        v.col(c).normalize();
    }
    Matrix uv(dim, probes);
    for (Index c = 0; c < probes; ++c) uv.col(c) = apply(v.col(c));
    return (uv.transpose() * uv - v.transpose() * v).cwiseAbs().maxCoeff();
}

SparseMatrix BlockEncoding::assemble() const {
    if (layout_.total_qubits() > 12) throw InvalidArgument("full assembly is limited to 12 qubits");
    SparseMatrix u = gates_.front();
    for (std::size_t i = 1; i < gates_.size(); ++i) u = (gates_[i] * u).pruned(1e-300);
    return u;
}

CircuitReport verify_block_encoding(const Vector& z, const CircuitLayout& layout, const KernelSpec& kernel,
                                    std::uint64_t seed) {
    const BlockEncoding be = build_block_encoding(z, layout, kernel);
    const Matrix exact = gram_center(gram_raw(z, kernel));
    const Matrix block = be.extract_block();
    CircuitReport r;
    r.qubits = layout.total_qubits();
    r.max_block_deviation = (static_cast<double>(layout.samples()) * block - exact).cwiseAbs().maxCoeff();
    r.unitarity_residual = std::max(be.gate_unitarity_residual(), be.probe_unitarity_residual(8, seed));
    return r;
}

} // namespace qkica
