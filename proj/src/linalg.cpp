#include "asym/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace asym {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected square");
    }
}

// Sort an ascending eigen-decomposition into non-increasing order.
EigenSystem sorted_descending(const RealVector& values, const ComplexMatrix& vectors) {
    const auto n = values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
    EigenSystem out{RealVector(n), ComplexMatrix(vectors.rows(), n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = values[order[static_cast<std::size_t>(k)]];
        out.vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

void check_hermitian(const ComplexMatrix& h, double tol) {
    require_square(h, "eig_hermitian");
    if (!all_finite(h)) throw ValidationError("eig_hermitian: non-finite entries");
    const double defect = hermiticity_defect(h);
    if (defect > tol) throw ValidationError("eig_hermitian: input is not Hermitian", defect);
}

}  // namespace

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_defect(const ComplexMatrix& u) {
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    if (u.size() == 0) return 0.0;
    return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

EigenSystem eig_hermitian(const ComplexMatrix& h, double hermitian_tol) {
    check_hermitian(h, hermitian_tol);
    const ComplexMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
    if (solver.info() != Eigen::Success) throw Error("eig_hermitian: eigensolver did not converge");
    return sorted_descending(solver.eigenvalues(), solver.eigenvectors());
}

EigenSystem eig_hermitian_jacobi(const ComplexMatrix& h, const JacobiOptions& options,
                                 double hermitian_tol) {
    check_hermitian(h, hermitian_tol);
    const Eigen::Index n = h.rows();
    ComplexMatrix a = 0.5 * (h + h.adjoint());
    ComplexMatrix v = ComplexMatrix::Identity(n, n);
    const double scale = std::max(1.0, a.norm());

    auto off_mass = [&] {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        if (off_mass() <= options.off_diagonal_tol * scale) break;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag < 1e-300) continue;
                // Rotate the phase of a(p,q) onto the positive real axis, then
                // apply the classical real Jacobi rotation in the (p,q) plane.
                const Complex phase = a(p, q) / mag;
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const Complex g_pp = c;
                const Complex g_pq = s;
                const Complex g_qp = -s * std::conj(phase);
                const Complex g_qq = c * std::conj(phase);
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * g_pp + akq * g_qp;
                    a(k, q) = akp * g_pq + akq * g_qq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
                    a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = vkp * g_pp + vkq * g_qp;
                    v(k, q) = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    if (off_mass() > 1e3 * options.off_diagonal_tol * scale) {
        throw Error("eig_hermitian_jacobi: no convergence within the sweep limit");
    }
    return sorted_descending(a.diagonal().real(), v);
}

std::vector<SpectralCluster> spectral_clusters(const EigenSystem& es, double tol) {
    std::vector<SpectralCluster> clusters;
    const Eigen::Index n = es.values.size();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && std::abs(es.values[end - 1] - es.values[end]) <= tol) ++end;
        const auto block = es.vectors.middleCols(start, end - start);
        SpectralCluster c;
        c.value = es.values.segment(start, end - start).mean();
        c.projector = block * block.adjoint();
        c.multiplicity = static_cast<std::size_t>(end - start);
        clusters.push_back(std::move(c));
        start = end;
    }
    return clusters;
}

ComplexMatrix hermitian_function(const EigenSystem& es, const std::function<double(double)>& f) {
    RealVector fv(es.values.size());
    for (Eigen::Index k = 0; k < fv.size(); ++k) fv[k] = f(es.values[k]);
    return es.vectors * fv.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComplexMatrix kron(std::span<const ComplexMatrix> factors) {
    ComplexMatrix out = ComplexMatrix::Ones(1, 1);
    for (const auto& f : factors) out = kron(out, f);
    return out;
}

ComplexMatrix identity(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return ComplexMatrix::Identity(n, n);
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
    require_square(m, "partial_trace");
    const std::size_t total = product(dims);
    if (static_cast<std::size_t>(m.rows()) != total) {
        throw DimensionError("partial_trace: factor dimensions multiply to " + std::to_string(total) +
                             " but matrix has dimension " + std::to_string(m.rows()));
    }
    std::vector<bool> kept(dims.size(), false);
    for (auto k : keep) {
        if (k >= dims.size()) throw DimensionError("partial_trace: keep index out of range");
        if (kept[k]) throw DimensionError("partial_trace: duplicate keep index");
        kept[k] = true;
    }

    std::size_t keep_dim = 1;
    std::size_t trace_dim = 1;
    for (std::size_t f = 0; f < dims.size(); ++f) (kept[f] ? keep_dim : trace_dim) *= dims[f];

    // For every full index, split into (kept multi-index, traced multi-index),
    // both flattened row-major in ascending factor order.
    std::vector<std::vector<Eigen::Index>> by_trace(trace_dim, std::vector<Eigen::Index>(keep_dim));
    std::vector<std::size_t> digits(dims.size());
    for (std::size_t full = 0; full < total; ++full) {
        std::size_t rem = full;
        for (std::size_t f = dims.size(); f-- > 0;) {
            digits[f] = rem % dims[f];
            rem /= dims[f];
        }
        std::size_t ki = 0;
        std::size_t ti = 0;
        for (std::size_t f = 0; f < dims.size(); ++f) {
            if (kept[f])
                ki = ki * dims[f] + digits[f];
            else
                ti = ti * dims[f] + digits[f];
        }
        by_trace[ti][ki] = static_cast<Eigen::Index>(full);
    }

    const auto kd = static_cast<Eigen::Index>(keep_dim);
    ComplexMatrix out = ComplexMatrix::Zero(kd, kd);
    for (const auto& idx : by_trace) out += m(idx, idx);
    return out;
}

ComplexMatrix permute_subsystems(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                 std::span<const std::size_t> perm) {
    require_square(m, "permute_subsystems");
    const std::size_t total = product(dims);
    if (static_cast<std::size_t>(m.rows()) != total || perm.size() != dims.size()) {
        throw DimensionError("permute_subsystems: inconsistent dimensions");
    }
    std::vector<bool> seen(dims.size(), false);
    for (auto p : perm) {
        if (p >= dims.size() || seen[p]) throw DimensionError("permute_subsystems: not a permutation");
        seen[p] = true;
    }
    // new_index(old_index) mapping.
    std::vector<Eigen::Index> map(total);
    std::vector<std::size_t> digits(dims.size());
    for (std::size_t old = 0; old < total; ++old) {
        std::size_t rem = old;
        for (std::size_t f = dims.size(); f-- > 0;) {
            digits[f] = rem % dims[f];
            rem /= dims[f];
        }
        std::size_t idx = 0;
        for (std::size_t k = 0; k < perm.size(); ++k) idx = idx * dims[perm[k]] + digits[perm[k]];
        map[old] = static_cast<Eigen::Index>(idx);
    }
    ComplexMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < total; ++i)
        for (std::size_t j = 0; j < total; ++j) out(map[i], map[j]) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

Norms norms(const ComplexMatrix& m) {
    Norms n;
    if (m.size() == 0) return n;
    n.frobenius = m.norm();
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const auto& sv = svd.singularValues();
    n.trace_norm = sv.sum();
    n.operator_norm = sv.size() > 0 ? sv[0] : 0.0;
    return n;
}

double trace_norm(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    // Hermitian input is the common case: |eigenvalues| are the singular values.
    if (m.rows() == m.cols() && hermiticity_defect(m) <= 1e-12 * std::max(1.0, m.norm())) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
        return solver.eigenvalues().cwiseAbs().sum();
    }
    return norms(m).trace_norm;
}

double operator_norm(const ComplexMatrix& m) {
    return norms(m).operator_norm;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("trace_distance: shape mismatch");
    return 0.5 * trace_norm(a - b);
}

}  // namespace asym
