#include <array>
#include "asym/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace asym {

namespace {

constexpr double kEntropyCutoff = 1e-14;
constexpr double kSupportCutoff = 1e-12;

double min_eigenvalue(const ComplexMatrix& h) {
    if (h.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues()[0];
}

ComplexMatrix matrix_unit(std::size_t d, std::size_t i, std::size_t j) {
    ComplexMatrix e = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    return e;
}

}  // namespace

// ---------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(ComplexMatrix m, double tol) {
    if (m.rows() != m.cols() || m.rows() == 0) throw DimensionError("DensityMatrix: expected a non-empty square matrix");
    if (!all_finite(m)) throw ValidationError("DensityMatrix: non-finite entries");
    const double herm = hermiticity_defect(m);
    if (herm > tol) throw ValidationError("DensityMatrix: not Hermitian", herm);
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > tol) throw ValidationError("DensityMatrix: trace differs from one", tr);
    matrix_ = 0.5 * (m + m.adjoint());
    const double lmin = min_eigenvalue(matrix_);
    if (lmin < -tol) throw ValidationError("DensityMatrix: negative eigenvalue", lmin);
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
    const double n = psi.norm();
    if (n == 0.0) throw ValidationError("DensityMatrix::pure: zero vector");
    const ComplexVector v = psi / n;
    return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::basis(std::size_t dim, std::size_t k) {
    if (k >= dim) throw DimensionError("DensityMatrix::basis: index out of range");
    return DensityMatrix(matrix_unit(dim, k, k));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> probabilities) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(probabilities.size()),
                                          static_cast<Eigen::Index>(probabilities.size()));
    for (std::size_t k = 0; k < probabilities.size(); ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = probabilities[k];
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::nearest(const ComplexMatrix& m) {
    const auto es = eig_hermitian(0.5 * (m + m.adjoint()));
    ComplexMatrix clipped = hermitian_function(es, [](double x) { return std::max(x, 0.0); });
    const double tr = clipped.trace().real();
    if (tr <= 0.0) throw ValidationError("DensityMatrix::nearest: no positive part");
    clipped /= tr;
    return DensityMatrix(0.5 * (clipped + clipped.adjoint()));
}

double DensityMatrix::purity() const {
    return (matrix_ * matrix_).trace().real();
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix(kron(a.matrix(), b.matrix()), 1e-9);
}

// ---------------------------------------------------------------- Hamiltonian

Hamiltonian::Hamiltonian(const ComplexMatrix& m, double tol) {
    if (m.rows() != m.cols() || m.rows() == 0) throw DimensionError("Hamiltonian: expected a non-empty square matrix");
    const double herm = hermiticity_defect(m);
    if (herm > tol) throw ValidationError("Hamiltonian: not Hermitian", herm);
    matrix_ = 0.5 * (m + m.adjoint());
    const ComplexMatrix off = matrix_ - ComplexMatrix(matrix_.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() == 0.0) {
        diagonal_ = true;
        basis_ = ComplexMatrix::Identity(m.rows(), m.cols());
        energies_.resize(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index k = 0; k < m.rows(); ++k) energies_[static_cast<std::size_t>(k)] = matrix_(k, k).real();
    } else {
        const auto es = eig_hermitian(matrix_);
        basis_ = es.vectors;
        energies_.assign(es.values.data(), es.values.data() + es.values.size());
    }
    finish();
}

Hamiltonian Hamiltonian::diagonal(std::vector<double> energies) {
    if (energies.empty()) throw DimensionError("Hamiltonian::diagonal: empty spectrum");
    Hamiltonian h;
    const auto n = static_cast<Eigen::Index>(energies.size());
    h.matrix_ = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) h.matrix_(k, k) = energies[static_cast<std::size_t>(k)];
    h.basis_ = ComplexMatrix::Identity(n, n);
    h.energies_ = std::move(energies);
    h.diagonal_ = true;
    h.finish();
    return h;
}

Hamiltonian Hamiltonian::pauli_z() {
    return diagonal({1.0, -1.0});
}

void Hamiltonian::finish() {
    integer_spectrum_ = std::all_of(energies_.begin(), energies_.end(),
                                    [](double e) { return std::abs(e - std::round(e)) <= 1e-9; });
}

std::vector<SpectralCluster> Hamiltonian::eigenspaces(double tol) const {
    std::vector<std::size_t> order(energies_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return energies_[a] < energies_[b]; });
    std::vector<SpectralCluster> out;
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        while (end < order.size() && energies_[order[end]] - energies_[order[end - 1]] <= tol) ++end;
        SpectralCluster c;
        c.projector = ComplexMatrix::Zero(basis_.rows(), basis_.rows());
        double sum = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            const auto col = basis_.col(static_cast<Eigen::Index>(order[k]));
            c.projector += col * col.adjoint();
            sum += energies_[order[k]];
        }
        c.multiplicity = end - start;
        c.value = sum / static_cast<double>(end - start);
        out.push_back(std::move(c));
        start = end;
    }
    return out;
}

Hamiltonian combined(const Hamiltonian& a, const Hamiltonian& b) {
    if (a.is_diagonal() && b.is_diagonal()) {
        std::vector<double> e;
        e.reserve(a.dim() * b.dim());
        for (double ea : a.energies())
            for (double eb : b.energies()) e.push_back(ea + eb);
        return Hamiltonian::diagonal(std::move(e));
    }
    return Hamiltonian(kron(a.matrix(), identity(b.dim())) + kron(identity(a.dim()), b.matrix()));
}

// ---------------------------------------------------------------- Channels

ChoiDefects choi_defects(const ComplexMatrix& choi, std::size_t dim_in, std::size_t dim_out) {
    ChoiDefects d;
    d.min_eigenvalue = min_eigenvalue(choi);
    const std::array<std::size_t, 2> dims{dim_in, dim_out};
    const std::array<std::size_t, 1> keep{0};
    const ComplexMatrix tp = partial_trace(choi, dims, keep);
    d.trace_preservation = (tp - identity(dim_in)).cwiseAbs().maxCoeff();
    return d;
}

ChoiChannel::ChoiChannel(ComplexMatrix choi, std::size_t dim_in, std::size_t dim_out, double tol)
    : dim_in_(dim_in), dim_out_(dim_out) {
    const auto n = static_cast<Eigen::Index>(dim_in * dim_out);
    if (choi.rows() != n || choi.cols() != n) throw DimensionError("ChoiChannel: Choi size does not match dim_in*dim_out");
    if (!all_finite(choi)) throw ValidationError("ChoiChannel: non-finite entries");
    const double herm = hermiticity_defect(choi);
    if (herm > tol) throw ValidationError("ChoiChannel: Choi matrix not Hermitian", herm);
    choi_ = 0.5 * (choi + choi.adjoint());
    const auto defects = choi_defects(choi_, dim_in, dim_out);
    if (defects.min_eigenvalue < -tol) throw ValidationError("ChoiChannel: not completely positive", defects.min_eigenvalue);
    if (defects.trace_preservation > tol) throw ValidationError("ChoiChannel: not trace preserving", defects.trace_preservation);
}

ChoiChannel ChoiChannel::identity(std::size_t d) {
    return from_unitary(asym::identity(d));
}

ChoiChannel ChoiChannel::from_kraus(std::span<const ComplexMatrix> kraus) {
    if (kraus.empty()) throw DimensionError("from_kraus: no Kraus operators");
    const auto dout = kraus.front().rows();
    const auto din = kraus.front().cols();
    ComplexMatrix j = ComplexMatrix::Zero(din * dout, din * dout);
    for (const auto& k : kraus) {
        if (k.rows() != dout || k.cols() != din) throw DimensionError("from_kraus: inconsistent Kraus shapes");
        // |K>> = sum_i |i> (x) K|i>
        ComplexVector v(din * dout);
        for (Eigen::Index i = 0; i < din; ++i) v.segment(i * dout, dout) = k.col(i);
        j += v * v.adjoint();
    }
    return ChoiChannel(std::move(j), static_cast<std::size_t>(din), static_cast<std::size_t>(dout));
}

ChoiChannel ChoiChannel::from_unitary(const ComplexMatrix& u) {
    const double defect = unitarity_defect(u);
    if (defect > kHermitianTol) throw ValidationError("from_unitary: matrix is not unitary", defect);
    const std::array<ComplexMatrix, 1> k{u};
    return from_kraus(k);
}

ChoiChannel ChoiChannel::completely_depolarizing(std::size_t d) {
    return ChoiChannel(asym::identity(d * d) / static_cast<double>(d), d, d);
}

ChoiChannel ChoiChannel::replacement(const DensityMatrix& sigma, std::size_t dim_in) {
    return ChoiChannel(kron(asym::identity(dim_in), sigma.matrix()), dim_in, sigma.dim());
}

ComplexMatrix apply_choi(const ComplexMatrix& choi, std::size_t dim_in, std::size_t dim_out, const ComplexMatrix& x) {
    const auto din = static_cast<Eigen::Index>(dim_in);
    const auto dout = static_cast<Eigen::Index>(dim_out);
    if (x.rows() != din || x.cols() != din) throw DimensionError("apply_choi: input dimension mismatch");
    ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
    for (Eigen::Index i = 0; i < din; ++i)
        for (Eigen::Index j = 0; j < din; ++j)
            if (x(i, j) != Complex(0.0)) out += x(i, j) * choi.block(i * dout, j * dout, dout, dout);
    return out;
}

ComplexMatrix ChoiChannel::apply(const ComplexMatrix& x) const {
    return apply_choi(choi_, dim_in_, dim_out_, x);
}

DensityMatrix apply_channel(const ChoiChannel& ch, const DensityMatrix& rho) {
    if (rho.dim() != ch.dim_in()) throw DimensionError("apply_channel: state dimension does not match channel input");
    return DensityMatrix(ch.apply(rho.matrix()), 1e-8);
}

ChoiChannel tensor(const ChoiChannel& a, const ChoiChannel& b) {
    const std::array<std::size_t, 4> dims{a.dim_in(), a.dim_out(), b.dim_in(), b.dim_out()};
    const std::array<std::size_t, 4> perm{0, 2, 1, 3};
    return ChoiChannel(permute_subsystems(kron(a.choi(), b.choi()), dims, perm), a.dim_in() * b.dim_in(),
                       a.dim_out() * b.dim_out());
}

ChoiChannel compose(const ChoiChannel& b, const ChoiChannel& a) {
    if (a.dim_out() != b.dim_in()) throw DimensionError("compose: intermediate dimensions differ");
    const auto din = static_cast<Eigen::Index>(a.dim_in());
    const auto dout = static_cast<Eigen::Index>(b.dim_out());
    ComplexMatrix j(din * dout, din * dout);
    for (Eigen::Index i = 0; i < din; ++i)
        for (Eigen::Index k = 0; k < din; ++k)
            j.block(i * dout, k * dout, dout, dout) = b.apply(a.apply(matrix_unit(a.dim_in(), static_cast<std::size_t>(i), static_cast<std::size_t>(k))));
    return ChoiChannel(std::move(j), a.dim_in(), b.dim_out());
}

ChoiChannel channel_from_stinespring(const ComplexMatrix& u, const DensityMatrix& ancilla,
                                     std::span<const std::size_t> dims, std::span<const std::size_t> traced) {
    const double defect = unitarity_defect(u);
    if (defect > kHermitianTol) throw ValidationError("channel_from_stinespring: dilation is not unitary", defect);
    const std::size_t total = product(dims);
    if (static_cast<std::size_t>(u.rows()) != total || total % ancilla.dim() != 0) {
        throw DimensionError("channel_from_stinespring: dims inconsistent with unitary and ancilla");
    }
    const std::size_t din = total / ancilla.dim();
    std::vector<std::size_t> keep;
    for (std::size_t f = 0; f < dims.size(); ++f)
        if (std::find(traced.begin(), traced.end(), f) == traced.end()) keep.push_back(f);
    std::size_t dout = 1;
    for (auto f : keep) dout *= dims[f];

    const auto di = static_cast<Eigen::Index>(din);
    const auto dO = static_cast<Eigen::Index>(dout);
    ComplexMatrix j(di * dO, di * dO);
    for (std::size_t a = 0; a < din; ++a) {
        for (std::size_t b = 0; b < din; ++b) {
            const ComplexMatrix x = kron(matrix_unit(din, a, b), ancilla.matrix());
            const ComplexMatrix y = u * x * u.adjoint();
            j.block(static_cast<Eigen::Index>(a) * dO, static_cast<Eigen::Index>(b) * dO, dO, dO) =
                partial_trace(y, dims, keep);
        }
    }
    return ChoiChannel(std::move(j), din, dout);
}

BipartiteMarginals marginals(const DensityMatrix& joint, std::size_t dim_r, std::size_t dim_s) {
    if (joint.dim() != dim_r * dim_s) throw DimensionError("marginals: joint dimension mismatch");
    const std::array<std::size_t, 2> dims{dim_r, dim_s};
    const std::array<std::size_t, 1> keep_r{0};
    const std::array<std::size_t, 1> keep_s{1};
    return {joint, DensityMatrix(partial_trace(joint.matrix(), dims, keep_r), 1e-9),
            DensityMatrix(partial_trace(joint.matrix(), dims, keep_s), 1e-9)};
}

// ---------------------------------------------------------------- Entropies

double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        const double l = solver.eigenvalues()[k];
        if (l > kEntropyCutoff) s -= l * std::log(l);
    }
    return std::max(0.0, s);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw DimensionError("relative_entropy: dimension mismatch");
    const auto er = eig_hermitian(rho.matrix());
    const auto es = eig_hermitian(sigma.matrix());
    // overlap(i,j) = |<r_i|s_j>|^2
    const Eigen::MatrixXd overlap = (er.vectors.adjoint() * es.vectors).cwiseAbs2();
    double value = 0.0;
    for (Eigen::Index i = 0; i < er.values.size(); ++i) {
        const double l = er.values[i];
        if (l <= kSupportCutoff) continue;
        value += l * std::log(l);
        double kernel_weight = 0.0;
        for (Eigen::Index j = 0; j < es.values.size(); ++j) {
            const double m = es.values[j];
            if (m <= kSupportCutoff)
                kernel_weight += overlap(i, j);
            else
                value -= l * overlap(i, j) * std::log(m);
        }
        if (kernel_weight * l > kSupportCutoff) return std::numeric_limits<double>::infinity();
    }
    return std::max(0.0, value);
}

DensityMatrix gibbs_state(const Hamiltonian& h, double beta) {
    if (!std::isfinite(beta)) throw ValidationError("gibbs_state: beta must be finite");
    const auto& e = h.energies();
    const double emin = *std::min_element(e.begin(), e.end());
    std::vector<double> w(e.size());
    double z = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) z += (w[k] = std::exp(-beta * (e[k] - emin)));
    Eigen::VectorXd p(static_cast<Eigen::Index>(e.size()));
    for (std::size_t k = 0; k < e.size(); ++k) p[static_cast<Eigen::Index>(k)] = w[k] / z;
    const auto& v = h.eigenbasis();
    return DensityMatrix(v * p.cast<Complex>().asDiagonal() * v.adjoint());
}

PredicateResult is_gibbs_preserving(const ChoiChannel& ch, const Hamiltonian& h, double beta, double tol) {
    if (ch.dim_in() != h.dim() || ch.dim_out() != h.dim()) throw DimensionError("is_gibbs_preserving: dimension mismatch");
    const auto gamma = gibbs_state(h, beta);
    const double r = trace_distance(ch.apply(gamma.matrix()), gamma.matrix());
    return {r <= tol, r};
}

ComplexMatrix dephase(const ComplexMatrix& x, const Hamiltonian& h) {
    if (static_cast<std::size_t>(x.rows()) != h.dim()) throw DimensionError("dephase: dimension mismatch");
    if (h.is_diagonal()) {
        // Exact zeroing of cross-energy entries; no projector arithmetic.
        const auto& e = h.energies();
        ComplexMatrix out = x;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                if (std::abs(e[static_cast<std::size_t>(i)] - e[static_cast<std::size_t>(j)]) > kClusterTol) out(i, j) = 0.0;
        return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
    for (const auto& c : h.eigenspaces()) out += c.projector * x * c.projector;
    return out;
}

double coherence_magnitude(const DensityMatrix& rho, const Hamiltonian& h) {
    return trace_norm(rho.matrix() - dephase(rho.matrix(), h));
}

}  // namespace asym
