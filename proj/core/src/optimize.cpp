#include "qkica/optimize.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "qkica/error.hpp"
#include "qkica/parallel.hpp"
#include "qkica/rng.hpp"

namespace qkica {

namespace {

Matrix expm_skew(const Matrix& s) {
    Matrix w = s.exp();
    return 0.5 * w * (3.0 * Matrix::Identity(s.rows(), s.cols()) - w.transpose() * w);
}

double finite_or_inf(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

struct Descent {
    Matrix W;
    double J = 0.0;
    std::vector<std::pair<int, double>> trace;
    bool converged = false;
    bool ok = true;
};

Descent descend(const Matrix& start, const std::vector<Matrix>& basis, const ContrastFn& contrast,
                const OptimizeOptions& opts) {
    Descent d;
    d.W = start;
    d.J = contrast(d.W);
    if (!std::isfinite(d.J)) {
        d.ok = false;
        return d;
    }
    d.trace.emplace_back(0, d.J);
    const Index m = start.rows();
    const double h = opts.fd_step;
    for (int it = 1; it <= opts.max_iters; ++it) {
        Vector g(static_cast<Index>(basis.size()));
        for (std::size_t a = 0; a < basis.size(); ++a) {
            const double up = contrast(expm_skew(h * basis[a]) * d.W);
            const double dn = contrast(expm_skew(-h * basis[a]) * d.W);
            if (!std::isfinite(up) || !std::isfinite(dn)) {
                d.ok = false;
                return d;
            }
            g(static_cast<Index>(a)) = (up - dn) / (2.0 * h);
        }
        const double gn = g.norm();
        if (gn == 0.0) {
            d.converged = true;
            break;
        }
        Matrix dir = Matrix::Zero(m, m);
        for (std::size_t a = 0; a < basis.size(); ++a) dir -= g(static_cast<Index>(a)) * basis[a];
        double alpha = opts.initial_step / gn;
        bool accepted = false;
        Matrix w_new;
        double j_new = 0.0;
        for (int tries = 0; tries < 30; ++tries) {
            w_new = expm_skew(alpha * dir) * d.W;
            j_new = finite_or_inf(contrast(w_new));
            if (j_new <= d.J - 1e-4 * alpha * gn * gn) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        const double decrease = d.J - j_new;
        if (!accepted || decrease < opts.tol / 10.0) {
            d.converged = true;
            break;
        }
        if ((w_new.transpose() * w_new - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10) {
            Eigen::HouseholderQR<Matrix> qr(w_new);
            Matrix q = qr.householderQ();
            const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
            for (Index c = 0; c < m; ++c)
                if (r(c, c) < 0.0) q.col(c) = -q.col(c);
            w_new = q;
        }
        d.W = w_new;
        d.J = j_new;
        d.trace.emplace_back(it, d.J);
        if (decrease < opts.tol) {
            d.converged = true;
            break;
        }
    }
    return d;
}

} // namespace

double GridAxis::value(Index i) const {
    if (steps <= 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

GridAxis GridAxis::parse(const std::string& s) {
    std::istringstream in(s);
    std::string lo, hi, steps;
    if (!std::getline(in, lo, ':') || !std::getline(in, hi, ':') || !std::getline(in, steps))
        throw InvalidArgument("grid must be LO:HI:STEPS, got '" + s + "'");
    GridAxis g;
    try {
        std::size_t used_lo = 0, used_hi = 0, used_steps = 0;
        g.lo = std::stod(lo, &used_lo);
        g.hi = std::stod(hi, &used_hi);
        g.steps = std::stol(steps, &used_steps);
        if (used_lo != lo.size() || used_hi != hi.size() || used_steps != steps.size())
            throw InvalidArgument("grid must be LO:HI:STEPS, got '" + s + "'");
    } catch (const std::exception&) {
        throw InvalidArgument("grid must be LO:HI:STEPS, got '" + s + "'");
    }
    if (g.steps < 1 || !(g.lo <= g.hi)) throw InvalidArgument("grid needs STEPS >= 1 and LO <= HI");
    return g;
}

LandscapeGrid scan_landscape(const GeneratorSet& generators, const GridAxis& axis1, const GridAxis& axis2,
                             const ContrastFn& contrast, int threads) {
    const std::size_t ng = generators.generators.size();
    if (ng < 1 || ng > 2) throw InvalidArgument("landscape scan takes one or two generators");
    LandscapeGrid grid;
    grid.axis1 = axis1;
    grid.axis2 = ng == 2 ? axis2 : GridAxis{0.0, 0.0, 1};
    const Index rows = axis1.steps;
    const Index cols = grid.axis2.steps;
    grid.J.resize(rows, cols);
    parallel_for(static_cast<std::size_t>(rows * cols), threads, [&](std::size_t idx) {
        const Index r = static_cast<Index>(idx) / cols;
        const Index c = static_cast<Index>(idx) % cols;
        GeneratorSet g = generators;
        g.deltas.assign(ng, 0.0);
        g.deltas[0] = axis1.value(r);
        if (ng == 2) g.deltas[1] = grid.axis2.value(c);
        grid.J(r, c) = finite_or_inf(contrast(rotation_from_generators(g)));
    });
    double best = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            if (grid.J(r, c) < best) {
                best = grid.J(r, c);
                grid.argmin_row = r;
                grid.argmin_col = c;
            }
        }
    }
    return grid;
}

OptimizeReport minimize_stiefel(Index m, const ContrastFn& contrast, const OptimizeOptions& opts,
                                const std::optional<Matrix>& start) {
    if (m < 1) throw InvalidArgument("optimizer needs m >= 1");
    if (opts.restarts < 1 || opts.max_iters < 0 || !(opts.fd_step > 0.0) || !(opts.tol > 0.0))
        throw InvalidArgument("optimizer options out of range");
    const GeneratorSet basis = GeneratorSet::elementary(m);
    OptimizeReport rep;
    rep.J_opt = std::numeric_limits<double>::infinity();
    if (basis.generators.empty()) {
        rep.W_opt = Matrix::Identity(m, m);
        rep.J_opt = contrast(rep.W_opt);
        rep.J_trace.emplace_back(0, rep.J_opt);
        rep.restarts_used = 1;
        rep.converged = true;
        return rep;
    }
    for (int r = 0; r < opts.restarts; ++r) {
        Matrix w0;
        if (r == 0) {
            w0 = start ? *start : Matrix::Identity(m, m);
        } else {
            CounterRng rng(opts.seed, {static_cast<std::uint64_t>(r)});
            GeneratorSet g = basis;
            for (auto& delta : g.deltas) delta = rng.uniform(-std::numbers::pi, std::numbers::pi);
            w0 = rotation_from_generators(g);
        }
        ++rep.restarts_used;
        Descent d = descend(w0, basis.generators, contrast, opts);
        if (!d.ok) {
            ++rep.failed_restarts;
            continue;
        }
        if (d.J < rep.J_opt) {
            rep.J_opt = d.J;
            rep.W_opt = d.W;
            rep.J_trace = std::move(d.trace);
            rep.converged = d.converged;
        }
    }
    if (rep.W_opt.size() == 0) throw NumericalError("optimize", "contrast was non-finite in every restart");
    return rep;
}

double amari_index(const Matrix& P) {
    if (P.rows() != P.cols() || P.rows() == 0) throw InvalidArgument("Amari error needs a square matrix");
    const Matrix a = P.cwiseAbs();
    const Index m = a.rows();
    double rows = 0.0;
    double cols = 0.0;
    for (Index i = 0; i < m; ++i) {
        const double rmax = a.row(i).maxCoeff();
        const double cmax = a.col(i).maxCoeff();
        if (!(rmax > 0.0) || !(cmax > 0.0)) throw InvalidArgument("Amari error needs no zero row or column");
        rows += a.row(i).sum() / rmax - 1.0;
        cols += a.col(i).sum() / cmax - 1.0;
    }
    return (rows + cols) / (2.0 * static_cast<double>(m));
}

double amari_error(const Matrix& mixing, const Matrix& unmixing) {
    if (mixing.rows() != unmixing.cols() || mixing.cols() != unmixing.rows())
        throw InvalidArgument("Amari error needs conformable matrices");
    return amari_index(unmixing * mixing);
}

Matrix correlation_matrix(const SampleMatrix& S1, const SampleMatrix& S2) {
    if (S1.n() != S2.n()) throw InvalidArgument("correlation needs equal sample counts");
    const Matrix a = S1.data.colwise() - S1.data.rowwise().mean();
    const Matrix b = S2.data.colwise() - S2.data.rowwise().mean();
    const Vector na = a.rowwise().norm();
    const Vector nb = b.rowwise().norm();
    for (Index i = 0; i < na.size(); ++i)
        if (!(na(i) > 0.0)) throw InvalidArgument("row " + std::to_string(i) + " of the first matrix has zero variance");
    for (Index i = 0; i < nb.size(); ++i)
        if (!(nb(i) > 0.0)) throw InvalidArgument("row " + std::to_string(i) + " of the second matrix has zero variance");
    return na.cwiseInverse().asDiagonal() * (a * b.transpose()) * nb.cwiseInverse().asDiagonal();
}

} // namespace qkica
