#include "asym/kidecomp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "asym/random.hpp"

namespace asym {

namespace {

using Index = Eigen::Index;

ComplexVector flatten(const ComplexMatrix& m) {
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unflatten(const ComplexVector& v, Index n) {
    return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

/// Incrementally built orthonormal basis of a matrix subspace.
class SpanBuilder {
public:
    SpanBuilder(Index n, double tol) : n_(n), tol_(tol) {}

    ComplexVector orthogonal_part(const ComplexMatrix& m) const {
        ComplexVector v = flatten(m);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : vectors_) v -= q * q.dot(v);
        return v;
    }

    bool add(const ComplexMatrix& m) {
        const double scale = m.norm();
        if (scale <= tol_) return false;
        ComplexVector v = orthogonal_part(m);
        const double rest = v.norm();
        if (rest <= tol_ * std::max(1.0, scale)) return false;
        vectors_.push_back(v / rest);
        return true;
    }

    std::size_t size() const noexcept { return vectors_.size(); }
    ComplexMatrix element(std::size_t i) const { return unflatten(vectors_[i], n_); }

    std::vector<ComplexMatrix> elements() const {
        std::vector<ComplexMatrix> out;
        out.reserve(vectors_.size());
        for (std::size_t i = 0; i < vectors_.size(); ++i) out.push_back(element(i));
        return out;
    }

private:
    Index n_;
    double tol_;
    std::vector<ComplexVector> vectors_;
};

AlgebraBasis close_algebra(const std::vector<ComplexMatrix>& matrices, const ComplexMatrix* weight, double tol) {
    if (matrices.empty()) throw DimensionError("generated_algebra: no generators");
    const Index n = matrices.front().rows();
    for (const auto& m : matrices)
        if (m.rows() != n || m.cols() != n) throw DimensionError("generated_algebra: generators must be square and equal-sized");

    ComplexMatrix w, w_inv;
    if (weight) {
        if (weight->rows() != n || weight->cols() != n) throw DimensionError("generated_algebra: weight size mismatch");
        w = *weight;
        w_inv = w.inverse();
    }

    SpanBuilder span(n, tol);
    span.add(ComplexMatrix::Identity(n, n));
    for (const auto& m : matrices) {
        span.add(m);
        span.add(m.adjoint());
    }
    for (std::size_t i = 0; i < span.size(); ++i) {
        const ComplexMatrix bi = span.element(i);
        span.add(bi.adjoint());
        if (weight) {
            span.add(w * bi * w_inv);
            span.add(w_inv * bi * w);
        }
        for (std::size_t j = 0; j <= i; ++j) {
            const ComplexMatrix bj = span.element(j);
            span.add(bi * bj);
            span.add(bj * bi);
        }
    }

    AlgebraBasis out;
    out.generators = matrices;
    out.basis = span.elements();
    out.space_dim = static_cast<std::size_t>(n);
    return out;
}

double orthogonal_norm(const std::vector<ComplexMatrix>& basis, const ComplexMatrix& m) {
    ComplexMatrix r = m;
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) r -= b * (b.adjoint() * r).trace();
    return r.norm();
}

struct Cluster {
    Index start = 0;
    Index size = 0;
    double value = 0.0;
};

std::vector<Cluster> cluster_values(const RealVector& values, double tol) {
    std::vector<Cluster> out;
    for (Index i = 0; i < values.size(); ++i) {
        if (!out.empty() && std::abs(values(i) - values(i - 1)) < tol) {
            ++out.back().size;
        } else {
            out.push_back({i, 1, values(i)});
        }
    }
    return out;
}

double min_gap(const std::vector<Cluster>& clusters) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < clusters.size(); ++i)
        gap = std::min(gap, std::abs(clusters[i].value - clusters[i - 1].value));
    return gap;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) / 2.0; }

/// Null space of the commutator map restricted to the algebra: the centre.
std::vector<ComplexMatrix> algebra_center(const std::vector<ComplexMatrix>& basis) {
    const Index n = basis.front().rows();
    const Index k = static_cast<Index>(basis.size());
    ComplexMatrix m(k * n * n, k);
    for (Index c = 0; c < k; ++c)
        for (Index l = 0; l < k; ++l) {
            const ComplexMatrix comm = basis[c] * basis[l] - basis[l] * basis[c];
            m.block(l * n * n, c, n * n, 1) = flatten(comm);
        }
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    const double cutoff = 1e-7 * std::max(1.0, s.size() ? s(0) : 0.0);
    std::vector<ComplexMatrix> center;
    for (Index i = 0; i < k; ++i) {
        const double sv = i < s.size() ? s(i) : 0.0;
        if (sv > cutoff) continue;
        ComplexMatrix z = ComplexMatrix::Zero(n, n);
        for (Index c = 0; c < k; ++c) z += svd.matrixV()(c, i) * basis[c];
        center.push_back(z);
    }
    return center;
}

ComplexMatrix random_combination(const std::vector<ComplexMatrix>& elems, Rng& rng, bool complex_coefficients) {
    std::normal_distribution<double> normal;
    ComplexMatrix out = ComplexMatrix::Zero(elems.front().rows(), elems.front().cols());
    for (const auto& e : elems) {
        const double re = normal(rng);
        const double im = complex_coefficients ? normal(rng) : 0.0;
        out += Complex(re, im) * e;
    }
    return out;
}

struct CentralSplit {
    EigenSystem es;
    std::vector<Cluster> clusters;
    double gap = 0.0;
};

CentralSplit split_center(const std::vector<ComplexMatrix>& center, const KiConfig& cfg, std::ostringstream& diag) {
    CentralSplit best;
    best.gap = -1.0;
    for (std::uint64_t attempt = 0; attempt < 3; ++attempt) {
        Rng rng = trial_rng(cfg.seed, 0, attempt);
        const ComplexMatrix h = hermitian_part(random_combination(center, rng, true));
        CentralSplit cur;
        cur.es = eig_hermitian(h);
        cur.clusters = cluster_values(cur.es.values, cfg.cluster_tol);
        cur.gap = cur.clusters.size() > 1 ? min_gap(cur.clusters) : std::numeric_limits<double>::infinity();
        if (cur.gap > best.gap) best = std::move(cur);
        if (best.gap >= 10.0 * cfg.cluster_tol) break;
        diag << "central eigenvalue gap " << best.gap << " below 10x cluster tolerance; resampled. ";
    }
    return best;
}

/// Factor one central block, given an orthonormal basis of its range.
KiBlock factor_block(const std::vector<ComplexMatrix>& basis, const ComplexMatrix& range, const KiConfig& cfg,
                     std::size_t block_index, double& residual) {
    const Index r = range.cols();
    std::vector<ComplexMatrix> local;
    local.reserve(basis.size());
    for (const auto& b : basis) local.push_back(range.adjoint() * b * range);

    SpanBuilder span(r, cfg.rank_tol);
    for (const auto& l : local) span.add(l);
    const std::size_t block_dim = span.size();
    const auto dim_j = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(block_dim))));
    if (dim_j * dim_j != block_dim || static_cast<std::size_t>(r) % dim_j != 0)
        throw ValidationError("decompose_algebra: block is not a full matrix algebra times a multiplicity",
                              static_cast<double>(block_dim));
    const std::size_t dim_k = static_cast<std::size_t>(r) / dim_j;
    const std::vector<ComplexMatrix> block_basis = span.elements();

    KiBlock block;
    block.dim_j = dim_j;
    block.dim_k = dim_k;
    block.omega = ComplexMatrix::Identity(static_cast<Index>(dim_k), static_cast<Index>(dim_k)) / static_cast<double>(dim_k);

    ComplexMatrix local_iso;
    if (dim_j == 1) {
        local_iso = ComplexMatrix::Identity(r, r);
    } else {
        bool done = false;
        for (std::uint64_t attempt = 0; attempt < 3 && !done; ++attempt) {
            Rng rng = trial_rng(cfg.seed, 1 + block_index, attempt);
            const EigenSystem es = eig_hermitian(hermitian_part(random_combination(block_basis, rng, false)));
            const auto clusters = cluster_values(es.values, cfg.cluster_tol);
            if (clusters.size() != dim_j) continue;
            if (std::any_of(clusters.begin(), clusters.end(),
                            [&](const Cluster& c) { return static_cast<std::size_t>(c.size) != dim_k; }))
                continue;
            const ComplexMatrix a = random_combination(block_basis, rng, true);
            const Index dk = static_cast<Index>(dim_k);
            const ComplexMatrix first = es.vectors.middleCols(clusters[0].start, dk);
            local_iso.resize(r, r);
            local_iso.leftCols(dk) = first;
            bool ok = true;
            for (std::size_t i = 1; i < dim_j && ok; ++i) {
                const ComplexMatrix ei = es.vectors.middleCols(clusters[i].start, dk);
                const ComplexMatrix c = ei.adjoint() * a * first;
                const double scale = std::sqrt(c.squaredNorm() / static_cast<double>(dim_k));
                if (scale < 1e-6 * std::max(1.0, a.norm())) {
                    ok = false;
                    break;
                }
                local_iso.middleCols(static_cast<Index>(i) * dk, dk) = ei * c / scale;
            }
            done = ok;
        }
        if (!done) throw ValidationError("decompose_algebra: could not resolve matrix units of a block", 0.0);
    }

    block.isometry = range * local_iso;

    const Dims dims{dim_j, dim_k};
    const std::array<std::size_t, 1> keep_j{0};
    const ComplexMatrix id_k = ComplexMatrix::Identity(static_cast<Index>(dim_k), static_cast<Index>(dim_k));
    residual = (local_iso.adjoint() * local_iso - ComplexMatrix::Identity(r, r)).norm();
    for (const auto& l : local) {
        const ComplexMatrix y = local_iso.adjoint() * l * local_iso;
        const ComplexMatrix bj = partial_trace(y, dims, keep_j) / static_cast<double>(dim_k);
        residual = std::max(residual, (y - kron(bj, id_k)).norm() / std::max(1.0, l.norm()));
    }
    return block;
}

void fill_family_data(KIDecomposition& dec, const std::vector<DensityMatrix>& family, const ComplexMatrix& average) {
    const std::array<std::size_t, 1> keep_j{0};
    const std::array<std::size_t, 1> keep_k{1};
    for (auto& b : dec.blocks) {
        const Dims dims{b.dim_j, b.dim_k};
        const ComplexMatrix x = b.isometry.adjoint() * average * b.isometry;
        const ComplexMatrix om = partial_trace(x, dims, keep_k);
        const double tr = om.trace().real();
        b.omega = tr > 1e-14 ? ComplexMatrix(hermitian_part(om) / tr) : ComplexMatrix(b.omega);
    }
    dec.weights.clear();
    dec.factors.clear();
    for (const auto& rho : family) {
        std::vector<double> q;
        std::vector<ComplexMatrix> f;
        for (const auto& b : dec.blocks) {
            const Dims dims{b.dim_j, b.dim_k};
            const ComplexMatrix x = b.isometry.adjoint() * rho.matrix() * b.isometry;
            const double w = x.trace().real();
            q.push_back(w);
            const Index dj = static_cast<Index>(b.dim_j);
            f.push_back(w > 1e-14 ? ComplexMatrix(hermitian_part(partial_trace(x, dims, keep_j)) / w)
                                  : ComplexMatrix(ComplexMatrix::Identity(dj, dj) / static_cast<double>(dj)));
        }
        dec.weights.push_back(std::move(q));
        dec.factors.push_back(std::move(f));
    }
}

}  // namespace

double AlgebraBasis::closure_defect() const {
    double worst = 0.0;
    for (const auto& a : basis)
        for (const auto& b : basis) worst = std::max(worst, orthogonal_norm(basis, a * b));
    return worst;
}

double AlgebraBasis::adjoint_defect() const {
    double worst = 0.0;
    for (const auto& a : basis) worst = std::max(worst, orthogonal_norm(basis, a.adjoint()));
    return worst;
}

AlgebraBasis generated_algebra(const std::vector<ComplexMatrix>& matrices, double tol) {
    return close_algebra(matrices, nullptr, tol);
}

AlgebraBasis generated_algebra(const std::vector<ComplexMatrix>& matrices, const ComplexMatrix& weight, double tol) {
    return close_algebra(matrices, &weight, tol);
}

KIDecomposition decompose_algebra(const AlgebraBasis& algebra, const KiConfig& config) {
    if (algebra.basis.empty()) throw DimensionError("decompose_algebra: empty algebra");
    const Index n = static_cast<Index>(algebra.space_dim);
    std::ostringstream diag;

    KIDecomposition dec;
    dec.dim = algebra.space_dim;
    dec.support = ComplexMatrix::Identity(n, n);

    const std::vector<ComplexMatrix> center = algebra_center(algebra.basis);
    if (center.empty()) throw ValidationError("decompose_algebra: empty centre (identity missing)", 0.0);
    const CentralSplit split = split_center(center, config, diag);

    double worst = 0.0;
    std::size_t index = 0;
    for (const auto& c : split.clusters) {
        const ComplexMatrix range = split.es.vectors.middleCols(c.start, c.size);
        double residual = 0.0;
        dec.blocks.push_back(factor_block(algebra.basis, range, config, index++, residual));
        worst = std::max(worst, residual);
    }
    dec.structure_residual = worst;
    if (worst > config.block_tol)
        throw ValidationError("decompose_algebra: block structure residual above tolerance", worst);
    dec.diagnostics = diag.str();
    return dec;
}

std::vector<DensityMatrix> orbit_family(const GroupAction& action, const DensityMatrix& rho, std::size_t grid) {
    std::vector<DensityMatrix> out;
    for (const auto& g : action.sample_elements(grid)) out.push_back(orbit_state(action, rho, g));
    return out;
}

KIDecomposition ki_for_family(const std::vector<DensityMatrix>& family, const KiConfig& config) {
    if (family.empty()) throw DimensionError("ki_for_family: empty family");
    const Index n = static_cast<Index>(family.front().dim());
    ComplexMatrix average = ComplexMatrix::Zero(n, n);
    for (const auto& rho : family) {
        if (static_cast<Index>(rho.dim()) != n) throw DimensionError("ki_for_family: states of different dimension");
        average += rho.matrix();
    }
    average /= static_cast<double>(family.size());

    const EigenSystem es = eig_hermitian(hermitian_part(average));
    Index m = 0;
    while (m < n && es.values(m) > config.support_cutoff) ++m;
    const ComplexMatrix support = es.vectors.leftCols(m);
    const RealVector weights = es.values.head(m);
    const RealVector inv_sqrt = weights.cwiseSqrt().cwiseInverse();

    std::vector<ComplexMatrix> ratios;
    ratios.reserve(family.size());
    for (const auto& rho : family) {
        const ComplexMatrix local = support.adjoint() * rho.matrix() * support;
        ratios.push_back(inv_sqrt.asDiagonal() * local * inv_sqrt.asDiagonal());
    }
    const ComplexMatrix modular = weights.cast<Complex>().asDiagonal();
    const AlgebraBasis algebra = generated_algebra(ratios, modular, config.rank_tol);

    KIDecomposition dec = decompose_algebra(algebra, config);
    for (auto& b : dec.blocks) b.isometry = support * b.isometry;
    dec.dim = static_cast<std::size_t>(n);
    dec.support = support;
    fill_family_data(dec, family, average);
    dec.reconstruction_residual = reconstruction_residual(family, dec);
    return dec;
}

KIDecomposition ki_for_invariant_family(const ChoiChannel& ch, const std::vector<DensityMatrix>& family,
                                        const KiConfig& config) {
    if (family.empty()) throw DimensionError("ki_for_invariant_family: empty family");
    if (ch.dim_in() != family.front().dim() || ch.dim_out() != family.front().dim())
        throw DimensionError("ki_for_invariant_family: channel does not act on the family's space");
    double worst = 0.0;
    for (const auto& rho : family) worst = std::max(worst, (ch.apply(rho.matrix()) - rho.matrix()).norm());
    if (worst > config.fixed_tol) throw ValidationError("ki_for_invariant_family: channel does not fix the family", worst);
    return ki_for_family(family, config);
}

double reconstruction_residual(const std::vector<DensityMatrix>& family, const KIDecomposition& dec) {
    const std::array<std::size_t, 1> keep_j{0};
    double worst = 0.0;
    for (const auto& rho : family) {
        ComplexMatrix rebuilt = ComplexMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
        for (const auto& b : dec.blocks) {
            const Dims dims{b.dim_j, b.dim_k};
            const ComplexMatrix x = b.isometry.adjoint() * rho.matrix() * b.isometry;
            const ComplexMatrix rj = partial_trace(x, dims, keep_j);
            rebuilt += b.isometry * kron(rj, b.omega) * b.isometry.adjoint();
        }
        worst = std::max(worst, (rho.matrix() - rebuilt).norm());
    }
    return worst;
}

SpectrumReport spectrum_constancy_check(const std::vector<DensityMatrix>& family, const KIDecomposition& dec,
                                        const KiConfig& config) {
    SpectrumReport rep;
    rep.spectrum_deviation.assign(dec.blocks.size(), 0.0);
    rep.weight_deviation.assign(dec.blocks.size(), 0.0);
    for (std::size_t j = 0; j < dec.blocks.size(); ++j) {
        const auto& b = dec.blocks[j];
        RealVector first;
        double first_weight = 0.0;
        for (std::size_t g = 0; g < family.size(); ++g) {
            const ComplexMatrix x = b.isometry.adjoint() * family[g].matrix() * b.isometry;
            const RealVector spec = eig_hermitian(hermitian_part(x), 1e-8).values;
            const double w = x.trace().real();
            if (g == 0) {
                first = spec;
                first_weight = w;
                continue;
            }
            rep.spectrum_deviation[j] = std::max(rep.spectrum_deviation[j], (spec - first).cwiseAbs().maxCoeff());
            rep.weight_deviation[j] = std::max(rep.weight_deviation[j], std::abs(w - first_weight));
        }
        rep.max_spectrum_deviation = std::max(rep.max_spectrum_deviation, rep.spectrum_deviation[j]);
        rep.max_weight_deviation = std::max(rep.max_weight_deviation, rep.weight_deviation[j]);
    }
    rep.constant = rep.max_spectrum_deviation <= config.spectrum_tol && rep.max_weight_deviation <= config.weight_tol;
    return rep;
}

}  // namespace asym
