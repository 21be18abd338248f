#include "qkica/nystrom.hpp"

#include <cmath>

#include "qkica/contrast.hpp"
#include "qkica/error.hpp"
#include "qkica/parallel.hpp"
#include "qkica/rng.hpp"

namespace qkica {

namespace {

constexpr std::uint64_t kDrawsPerSample = 4;

void check_extendable(const Eigenfunction& ef) {
    if (!(ef.mu > 1e-10)) throw InvalidArgument("eigenvalue too small for a stable Nystrom extension");
    if (ef.values.size() != ef.base.size() || ef.row_means.size() != ef.base.size())
        throw InvalidArgument("eigenfunction is inconsistent");
}

// Values (and derivatives) of several eigenfunctions sharing one base sample
// at the points x; column e belongs to efs[e].
void extend_shared(const std::vector<Eigenfunction>& efs, const Vector& x, Matrix& value, Matrix* deriv) {
    const Index E = static_cast<Index>(efs.size());
    value.setZero(x.size(), E);
    if (deriv) deriv->setZero(x.size(), E);
    if (E == 0) return;
    for (const auto& ef : efs) check_extendable(ef);
    const Vector& z = efs.front().base;
    const Vector& r = efs.front().row_means;
    const double sigma2 = efs.front().kernel.sigma * efs.front().kernel.sigma;
    const Index n = z.size();
    Matrix phi(n, E);
    Vector scale(E);
    for (Index e = 0; e < E; ++e) {
        if (efs[static_cast<std::size_t>(e)].base.size() != n) throw InvalidArgument("eigenfunctions must share a base");
        phi.col(e) = efs[static_cast<std::size_t>(e)].values;
        scale(e) = 1.0 / (static_cast<double>(n) * efs[static_cast<std::size_t>(e)].mu);
    }
    Vector kv(n);
    Vector dv(n);
    for (Index p = 0; p < x.size(); ++p) {
        for (Index j = 0; j < n; ++j) {
            const double diff = x(p) - z(j);
            const double k = std::exp(-diff * diff / (2.0 * sigma2));
            kv(j) = k - r(j);
            dv(j) = -diff / sigma2 * k;
        }
        value.row(p) = (kv.transpose() * phi).cwiseProduct(scale.transpose());
        if (deriv) deriv->row(p) = (dv.transpose() * phi).cwiseProduct(scale.transpose());
    }
}

Vector draw(const Distribution& d, Index n, std::uint64_t seed, std::uint64_t stream) {
    CounterRng rng(seed, {stream});
    Vector out(n);
    for (Index j = 0; j < n; ++j) {
        rng.seek(static_cast<std::uint64_t>(j) * kDrawsPerSample);
        out(j) = d.sample(rng);
    }
    return out;
}

} // namespace

double OverlapEstimate::standard_error() const {
    return n_mc > 0 ? D / std::sqrt(static_cast<double>(n_mc)) : 0.0;
}

std::vector<Eigenfunction> eigenfunctions(const Vector& z, const GramSpectrum& spectrum, Index count,
                                          const KernelSpec& kernel, Index variable) {
    if (count > spectrum.kept()) throw InvalidArgument("asked for more eigenfunctions than kept pairs");
    if (spectrum.vectors.rows() != z.size()) throw InvalidArgument("spectrum does not match the samples");
    const Matrix raw = gram_raw(z, kernel);
    const Vector row_means = raw.rowwise().mean();
    const double root_n = std::sqrt(static_cast<double>(z.size()));
    std::vector<Eigenfunction> out;
    for (Index k = 0; k < count; ++k) {
        Eigenfunction ef;
        ef.variable = variable;
        ef.index = k;
        ef.values = root_n * spectrum.vectors.col(k);
        ef.mu = spectrum.mu(k);
        ef.base = z;
        ef.row_means = row_means;
        ef.kernel = kernel;
        out.push_back(std::move(ef));
    }
    return out;
}

double centered_kernel_eval(const Vector& samples, const KernelSpec& kernel, double x, double y) {
    const Index n = samples.size();
    if (n == 0) throw InvalidArgument("centered kernel needs samples");
    double mean_y = 0.0;
    double mean_x = 0.0;
    double grand = 0.0;
    for (Index a = 0; a < n; ++a) {
        mean_y += kernel_eval(kernel, samples(a), y);
        mean_x += kernel_eval(kernel, x, samples(a));
        for (Index b = 0; b < n; ++b) grand += kernel_eval(kernel, samples(a), samples(b));
    }
    const double nd = static_cast<double>(n);
    return kernel_eval(kernel, x, y) - mean_y / nd - mean_x / nd + grand / (nd * nd);
}

void extend_batch(const Eigenfunction& ef, const Vector& x, Vector& value, Vector* deriv) {
    Matrix v;
    Matrix d;
    extend_shared({ef}, x, v, deriv ? &d : nullptr);
    value = v.col(0);
    if (deriv) *deriv = d.col(0);
}

double extend_eigenfunction(const Eigenfunction& ef, double x) {
    Vector v;
    extend_batch(ef, Vector::Constant(1, x), v, nullptr);
    return v(0);
}

double extend_derivative(const Eigenfunction& ef, double x) {
    Vector v;
    Vector d;
    extend_batch(ef, Vector::Constant(1, x), v, &d);
    return d(0);
}

double overlap_via_M(const Eigenfunction& a, const Eigenfunction& b, const Vector& zi, const Vector& zj) {
    if (zi.size() != zj.size() || zi.size() == 0) throw InvalidArgument("overlap needs paired samples of equal length");
    Vector va;
    Vector vb;
    extend_batch(a, zi, va, nullptr);
    extend_batch(b, zj, vb, nullptr);
    return va.dot(vb) / static_cast<double>(zi.size());
}

std::vector<OverlapEstimate> estimate_C_D_table(const std::vector<Eigenfunction>& efi,
                                                const std::vector<Eigenfunction>& efj,
                                                const Distribution& si, const Distribution& sj,
                                                Index n_mc, std::uint64_t seed) {
    if (n_mc < 100) throw InvalidArgument("n_mc must be at least 100");
    const Vector x = draw(si, n_mc, seed, 0);
    const Vector y = draw(sj, n_mc, seed, 1);
    Matrix fx, dfx, fy, dfy;
    extend_shared(efi, x, fx, &dfx);
    extend_shared(efj, y, fy, &dfy);
    std::vector<OverlapEstimate> out;
    for (std::size_t k = 0; k < efi.size(); ++k) {
        for (std::size_t l = 0; l < efj.size(); ++l) {
            const Index a = static_cast<Index>(k);
            const Index b = static_cast<Index>(l);
            const Vector g = -(x.cwiseProduct(fx.col(a)).cwiseProduct(dfy.col(b)) -
                               y.cwiseProduct(dfx.col(a)).cwiseProduct(fy.col(b)));
            OverlapEstimate est;
            est.k = efi[k].index;
            est.l = efj[l].index;
            est.n_mc = n_mc;
            est.C = g.mean();
            est.D = std::sqrt(std::max(0.0, g.squaredNorm() / static_cast<double>(n_mc) - est.C * est.C));
            out.push_back(est);
        }
    }
    return out;
}

OverlapEstimate estimate_C_D(const Eigenfunction& a, const Eigenfunction& b, const Distribution& si,
                             const Distribution& sj, Index n_mc, std::uint64_t seed) {
    return estimate_C_D_table({a}, {b}, si, sj, n_mc, seed).front();
}

CoverageResult coverage_trial(const Distribution& si, const Distribution& sj, const CoverageOptions& opts) {
    CoverageResult res;
    if (opts.eps2 * opts.F_ij == 0.0) {
        res.skipped = true;
        return res;
    }
    if (!(opts.eps2 > 0.0 && opts.eps2 <= 0.1)) throw InvalidArgument("eps2 must lie in (0, 0.1]");
    if (opts.N < 100 || opts.n_trials < 1 || opts.top < 1) throw InvalidArgument("coverage trial needs N >= 100");

    ContrastOptions copts;
    copts.kernel = opts.kernel;
    copts.eps_trunc = opts.eps_trunc;

    SourceSpec ref_spec{{si, sj}, opts.N, mix64(opts.seed ^ 0x5245465245ULL)};
    const SampleMatrix ref = sample_sources(ref_spec);
    const auto ref_spectra = spectra_of(ref.data, copts);
    for (const auto& s : ref_spectra)
        if (s.kept() == 0) throw NumericalError("nystrom", "degenerate reference spectrum (kept = 0)");
    const auto ef1 = eigenfunctions(ref.data.row(0).transpose(), ref_spectra[0],
                                    std::min(opts.top, ref_spectra[0].kept()), opts.kernel, 0);
    const auto ef2 = eigenfunctions(ref.data.row(1).transpose(), ref_spectra[1],
                                    std::min(opts.top, ref_spectra[1].kept()), opts.kernel, 1);
    const auto table = estimate_C_D_table(ef1, ef2, si, sj, opts.n_mc, mix64(opts.seed ^ 0x4D43ULL));
    res.pair = table.front();
    for (const auto& e : table)
        if (std::abs(e.C) > std::abs(res.pair.C)) res.pair = e;
    res.pair.F_ij = opts.F_ij;

    const double target = opts.eps2 * opts.F_ij * res.pair.C;
    res.half_width = opts.delta * opts.eps2 * std::abs(opts.F_ij) * res.pair.D / std::sqrt(static_cast<double>(opts.N));
    const Eigenfunction& ref_k = ef1[static_cast<std::size_t>(res.pair.k)];
    const Eigenfunction& ref_l = ef2[static_cast<std::size_t>(res.pair.l)];

    res.overlaps.assign(static_cast<std::size_t>(opts.n_trials), 0.0);
    parallel_for(static_cast<std::size_t>(opts.n_trials), opts.threads, [&](std::size_t t) {
        SourceSpec spec{{si, sj}, opts.N, mix64(opts.seed + 0x9E3779B97F4A7C15ULL * (t + 1))};
        const SampleMatrix s = sample_sources(spec);
        Matrix z(2, opts.N);
        z.row(0) = s.data.row(0) + opts.eps2 * opts.F_ij * s.data.row(1);
        z.row(1) = s.data.row(1) - opts.eps2 * opts.F_ij * s.data.row(0);
        const auto spectra = spectra_of(z, copts);
        // Match each reference eigenfunction to the trial eigenvector it
        // overlaps most, and take the sign from that overlap.
        auto match = [&](const Eigenfunction& ref_ef, const GramSpectrum& sp, const Vector& zi, Vector& u) {
            if (sp.kept() == 0) throw NumericalError("nystrom", "degenerate trial spectrum (kept = 0)");
            Vector phi;
            extend_batch(ref_ef, zi, phi, nullptr);
            const Index limit = std::min<Index>(sp.kept(), opts.top + 2);
            Index best = 0;
            double best_abs = -1.0;
            double best_val = 0.0;
            for (Index k = 0; k < limit; ++k) {
                const double v = phi.dot(sp.vectors.col(k));
                if (std::abs(v) > best_abs) {
                    best_abs = std::abs(v);
                    best = k;
                    best_val = v;
                }
            }
            u = (best_val < 0.0 ? -1.0 : 1.0) * sp.vectors.col(best);
        };
        Vector u1, u2;
        match(ref_k, spectra[0], z.row(0).transpose(), u1);
        match(ref_l, spectra[1], z.row(1).transpose(), u2);
        res.overlaps[t] = u1.dot(u2);
    });

    double covered = 0.0;
    double mean = 0.0;
    for (double o : res.overlaps) {
        if (std::abs(o - target) < res.half_width) covered += 1.0;
        mean += o - target;
    }
    const double nt = static_cast<double>(res.overlaps.size());
    mean /= nt;
    double var = 0.0;
    for (double o : res.overlaps) var += (o - target - mean) * (o - target - mean);
    res.coverage = covered / nt;
    res.spread = nt > 1 ? std::sqrt(var / (nt - 1.0)) : 0.0;
    return res;
}

} // namespace qkica
