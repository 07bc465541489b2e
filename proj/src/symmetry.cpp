#include "asym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace asym {

namespace {

constexpr double kRepTol = 1e-9;

ComplexMatrix permutation_matrix(const std::vector<std::size_t>& pi) {
    const auto n = static_cast<Eigen::Index>(pi.size());
    ComplexMatrix u = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) u(static_cast<Eigen::Index>(pi[static_cast<std::size_t>(i)]), i) = 1.0;
    return u;
}

std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<std::size_t>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::size_t element_index(const PermutationRep& rep, const std::vector<std::size_t>& pi) {
    const auto it = std::lower_bound(rep.elements.begin(), rep.elements.end(), pi);
    return static_cast<std::size_t>(it - rep.elements.begin());
}

void check_homomorphism(const PermutationRep& rep) {
    const std::size_t g = rep.elements.size();
    auto check_pair = [&](std::size_t a, std::size_t b) {
        std::vector<std::size_t> ab(rep.n);
        for (std::size_t i = 0; i < rep.n; ++i) ab[i] = rep.elements[a][rep.elements[b][i]];
        const auto& uab = rep.unitaries[element_index(rep, ab)];
        const double defect = (rep.unitaries[a] * rep.unitaries[b] - uab).cwiseAbs().maxCoeff();
        if (defect > 1e-10) throw ValidationError("permutation representation: U_pi U_sigma != U_{pi sigma}", defect);
    };
    if (g * g <= 576) {
        for (std::size_t a = 0; a < g; ++a)
            for (std::size_t b = 0; b < g; ++b) check_pair(a, b);
    } else {
        std::mt19937_64 rng(0x5eedULL);
        std::uniform_int_distribution<std::size_t> pick(0, g - 1);
        for (int k = 0; k < 20; ++k) check_pair(pick(rng), pick(rng));
    }
}

double choi_frequency(const std::vector<double>& ein, const std::vector<double>& eout, std::size_t row,
                      std::size_t col) {
    const std::size_t dout = eout.size();
    const std::size_t i = row / dout, a = row % dout;
    const std::size_t j = col / dout, b = col % dout;
    return (eout[a] - ein[i]) - (eout[b] - ein[j]);
}

BohrModeIndex group_by_frequency(std::size_t rows, std::size_t cols, const auto& frequency) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> entries;
    entries.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) entries.emplace_back(frequency(r, c), r, c);
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& x, const auto& y) { return std::get<0>(x) < std::get<0>(y); });
    BohrModeIndex idx;
    for (const auto& [w, r, c] : entries) {
        if (idx.frequencies.empty() || w - idx.frequencies.back() > kClusterTol) {
            idx.frequencies.push_back(w);
            idx.members.emplace_back();
        }
        idx.members.back().emplace_back(r, c);
    }
    return idx;
}

// Conjugation matrices W_g = conj(U_in) (x) U_out for every group element.
std::vector<ComplexMatrix> choi_conjugations(const GroupAction& in, const GroupAction& out) {
    std::vector<ComplexMatrix> ws;
    for (const auto& g : in.sample_elements()) ws.push_back(kron(in.unitary(g).conjugate(), out.unitary(g)));
    return ws;
}

void require_same_group(const GroupAction& in, const GroupAction& out) {
    if (in.variant().index() != out.variant().index() || in.order() != out.order()) {
        throw ValidationError("input and output actions must represent the same group");
    }
}

}  // namespace

// ---------------------------------------------------------------- GroupAction

GroupAction::GroupAction(Variant v) : v_(std::move(v)) {
    dim_ = std::visit(
        [](const auto& a) -> std::size_t {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, TimeTranslation>)
                return a.hamiltonian.dim();
            else if constexpr (std::is_same_v<T, FiniteCyclic>)
                return static_cast<std::size_t>(a.generator.rows());
            else
                return static_cast<std::size_t>(a.unitaries.front().rows());
        },
        v_);
}

GroupAction GroupAction::time_translation(Hamiltonian h) {
    if (!h.integer_spectrum()) throw ValidationError("time_translation: Hamiltonian spectrum must be integer");
    return GroupAction(TimeTranslation{std::move(h)});
}

GroupAction GroupAction::finite_cyclic(std::size_t order, ComplexMatrix generator) {
    if (order == 0) throw ValidationError("finite_cyclic: order must be positive");
    const double defect = unitarity_defect(generator);
    if (defect > kHermitianTol) throw ValidationError("finite_cyclic: generator is not unitary", defect);
    ComplexMatrix p = identity(static_cast<std::size_t>(generator.rows()));
    for (std::size_t k = 0; k < order; ++k) p = p * generator;
    const double cyc = (p - identity(static_cast<std::size_t>(generator.rows()))).cwiseAbs().maxCoeff();
    if (cyc > kRepTol) throw ValidationError("finite_cyclic: generator^order differs from identity", cyc);
    return GroupAction(FiniteCyclic{order, std::move(generator)});
}

GroupAction GroupAction::cyclic_phases(std::size_t order, const Hamiltonian& h) {
    if (!h.integer_spectrum()) throw ValidationError("cyclic_phases: Hamiltonian spectrum must be integer");
    const double theta = 2.0 * std::numbers::pi / static_cast<double>(order);
    ComplexVector phases(static_cast<Eigen::Index>(h.dim()));
    for (std::size_t k = 0; k < h.dim(); ++k)
        phases[static_cast<Eigen::Index>(k)] = std::polar(1.0, -theta * std::round(h.energies()[k]));
    const auto& w = h.eigenbasis();
    ComplexMatrix gen = w * phases.asDiagonal() * w.adjoint();
    if (h.is_diagonal()) gen = ComplexMatrix(phases.asDiagonal());
    return finite_cyclic(order, std::move(gen));
}

GroupAction GroupAction::permutation(std::size_t n) {
    if (n == 0) throw ValidationError("permutation: n must be positive");
    PermutationRep rep;
    rep.n = n;
    rep.elements = all_permutations(n);
    for (const auto& pi : rep.elements) rep.unitaries.push_back(permutation_matrix(pi));
    return GroupAction(std::move(rep));
}

GroupAction GroupAction::permutation(std::size_t n, std::vector<ComplexMatrix> unitaries) {
    PermutationRep rep;
    rep.n = n;
    rep.elements = all_permutations(n);
    if (unitaries.size() != rep.elements.size()) throw DimensionError("permutation: need one unitary per group element");
    for (const auto& u : unitaries) {
        const double defect = unitarity_defect(u);
        if (defect > kHermitianTol) throw ValidationError("permutation: representative is not unitary", defect);
        if (u.rows() != unitaries.front().rows()) throw DimensionError("permutation: representatives differ in size");
    }
    rep.unitaries = std::move(unitaries);
    check_homomorphism(rep);
    return GroupAction(std::move(rep));
}

std::size_t GroupAction::order() const noexcept {
    if (const auto* c = std::get_if<FiniteCyclic>(&v_)) return c->order;
    if (const auto* p = std::get_if<PermutationRep>(&v_)) return p->elements.size();
    return 0;
}

const char* GroupAction::tag() const noexcept {
    switch (v_.index()) {
        case 0: return "time_translation";
        case 1: return "finite_cyclic";
        default: return "permutation";
    }
}

ComplexMatrix GroupAction::unitary(const GroupElement& g) const {
    if (const auto* tt = std::get_if<TimeTranslation>(&v_)) {
        const auto* t = std::get_if<double>(&g);
        if (!t) throw ValidationError("time translation elements are real times");
        const auto& h = tt->hamiltonian;
        ComplexVector phases(static_cast<Eigen::Index>(h.dim()));
        for (std::size_t k = 0; k < h.dim(); ++k) phases[static_cast<Eigen::Index>(k)] = std::polar(1.0, -h.energies()[k] * *t);
        if (h.is_diagonal()) return ComplexMatrix(phases.asDiagonal());
        return h.eigenbasis() * phases.asDiagonal() * h.eigenbasis().adjoint();
    }
    const auto* k = std::get_if<std::size_t>(&g);
    if (!k) throw ValidationError("finite group elements are indices");
    if (*k >= order()) throw ValidationError("group element index out of range", static_cast<double>(*k));
    if (const auto* c = std::get_if<FiniteCyclic>(&v_)) {
        ComplexMatrix u = identity(dim_);
        for (std::size_t s = 0; s < *k; ++s) u = u * c->generator;
        return u;
    }
    return std::get<PermutationRep>(v_).unitaries[*k];
}

std::vector<GroupElement> GroupAction::sample_elements(std::size_t grid) const {
    std::vector<GroupElement> out;
    if (is_finite()) {
        for (std::size_t k = 0; k < order(); ++k) out.emplace_back(k);
    } else {
        for (std::size_t k = 0; k < grid; ++k)
            out.emplace_back(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid));
    }
    return out;
}

GroupAction tensor(const GroupAction& a, const GroupAction& b) {
    require_same_group(a, b);
    if (const auto* ta = std::get_if<TimeTranslation>(&a.variant())) {
        const auto& tb = std::get<TimeTranslation>(b.variant());
        return GroupAction::time_translation(combined(ta->hamiltonian, tb.hamiltonian));
    }
    if (const auto* ca = std::get_if<FiniteCyclic>(&a.variant())) {
        const auto& cb = std::get<FiniteCyclic>(b.variant());
        return GroupAction::finite_cyclic(ca->order, kron(ca->generator, cb.generator));
    }
    const auto& pa = std::get<PermutationRep>(a.variant());
    const auto& pb = std::get<PermutationRep>(b.variant());
    std::vector<ComplexMatrix> us;
    for (std::size_t k = 0; k < pa.unitaries.size(); ++k) us.push_back(kron(pa.unitaries[k], pb.unitaries[k]));
    return GroupAction::permutation(pa.n, std::move(us));
}

// ---------------------------------------------------------------- Bohr modes

BohrModeIndex bohr_modes(const Hamiltonian& h) {
    const auto& e = h.energies();
    return group_by_frequency(e.size(), e.size(), [&](std::size_t r, std::size_t c) { return e[r] - e[c]; });
}

BohrModeIndex bohr_modes(const Hamiltonian& in, const Hamiltonian& out) {
    const std::size_t n = in.dim() * out.dim();
    return group_by_frequency(n, n, [&](std::size_t r, std::size_t c) {
        return choi_frequency(in.energies(), out.energies(), r, c);
    });
}

// ---------------------------------------------------------------- Orbits and twirls

DensityMatrix orbit_state(const GroupAction& action, const DensityMatrix& rho, const GroupElement& g) {
    if (rho.dim() != action.dim()) throw DimensionError("orbit_state: dimension mismatch");
    const ComplexMatrix u = action.unitary(g);
    return DensityMatrix(u * rho.matrix() * u.adjoint(), 1e-9);
}

ComplexMatrix twirl_operator(const GroupAction& action, const ComplexMatrix& x) {
    if (static_cast<std::size_t>(x.rows()) != action.dim()) throw DimensionError("twirl: dimension mismatch");
    if (const auto* tt = std::get_if<TimeTranslation>(&action.variant())) return dephase(x, tt->hamiltonian);
    ComplexMatrix acc = ComplexMatrix::Zero(x.rows(), x.cols());
    for (const auto& g : action.sample_elements()) {
        const ComplexMatrix u = action.unitary(g);
        acc += u * x * u.adjoint();
    }
    return acc / static_cast<double>(action.order());
}

DensityMatrix twirl_state(const GroupAction& action, const DensityMatrix& rho) {
    return DensityMatrix(twirl_operator(action, rho.matrix()), 1e-9);
}

CovarianceProjector::CovarianceProjector(const GroupAction& in, const GroupAction& out) {
    require_same_group(in, out);
    dim_ = in.dim() * out.dim();
    const auto n = static_cast<Eigen::Index>(dim_);

    if (const auto* tin = std::get_if<TimeTranslation>(&in.variant())) {
        const auto& hin = tin->hamiltonian;
        const auto& hout = std::get<TimeTranslation>(out.variant()).hamiltonian;
        factor_ = ComplexMatrix::Zero(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c)
                if (std::abs(choi_frequency(hin.energies(), hout.energies(), static_cast<std::size_t>(r),
                                            static_cast<std::size_t>(c))) <= kClusterTol)
                    factor_(r, c) = 1.0;
        if (!(hin.is_diagonal() && hout.is_diagonal())) {
            rotated_ = true;
            basis_ = kron(hin.eigenbasis().conjugate(), hout.eigenbasis());
        }
        return;
    }

    auto ws = choi_conjugations(in, out);
    const bool diagonal = std::all_of(ws.begin(), ws.end(), [](const ComplexMatrix& w) {
        ComplexMatrix off = w;
        off.diagonal().setZero();
        return off.cwiseAbs().maxCoeff() == 0.0;
    });
    if (!diagonal) {
        conjugations_ = std::move(ws);
        return;
    }
    factor_ = ComplexMatrix::Zero(n, n);
    for (const auto& w : ws) factor_ += w.diagonal() * w.diagonal().adjoint();
    factor_ /= static_cast<double>(ws.size());
    // Averages of one-dimensional characters are exactly 0 or 1.
    factor_ = factor_.unaryExpr([](const Complex& z) { return Complex(std::abs(z - 1.0) < 1e-9 ? 1.0 : 0.0, 0.0); });
}

ComplexMatrix CovarianceProjector::apply(const ComplexMatrix& choi) const {
    const auto n = static_cast<Eigen::Index>(dim_);
    if (choi.rows() != n || choi.cols() != n) throw DimensionError("twirl_choi: Choi size does not match actions");
    if (!conjugations_.empty()) {
        ComplexMatrix acc = ComplexMatrix::Zero(n, n);
        for (const auto& w : conjugations_) acc.noalias() += w * choi * w.adjoint();
        return acc / static_cast<double>(conjugations_.size());
    }
    if (!rotated_) return choi.cwiseProduct(factor_);
    const ComplexMatrix inner = (basis_.adjoint() * choi * basis_).cwiseProduct(factor_);
    return basis_ * inner * basis_.adjoint();
}

ComplexMatrix twirl_choi(const GroupAction& in, const GroupAction& out, const ComplexMatrix& choi) {
    return CovarianceProjector(in, out).apply(choi);
}

ChoiChannel twirl_channel(const GroupAction& in, const GroupAction& out, const ChoiChannel& ch) {
    if (ch.dim_in() != in.dim() || ch.dim_out() != out.dim()) throw DimensionError("twirl_channel: dimension mismatch");
    return ChoiChannel(twirl_choi(in, out, ch.choi()), ch.dim_in(), ch.dim_out());
}

PredicateResult is_covariant(const ChoiChannel& ch, const GroupAction& in, const GroupAction& out, double tol) {
    if (ch.dim_in() != in.dim() || ch.dim_out() != out.dim()) throw DimensionError("is_covariant: dimension mismatch");
    double residual = 0.0;
    if (in.is_finite()) {
        require_same_group(in, out);
        for (const auto& w : choi_conjugations(in, out))
            residual = std::max(residual, (w * ch.choi() * w.adjoint() - ch.choi()).norm());
    } else {
        residual = (ch.choi() - twirl_choi(in, out, ch.choi())).norm();
    }
    return {residual <= tol, residual};
}

PredicateResult is_symmetric(const GroupAction& action, const ComplexMatrix& rho, double tol) {
    const double r = (rho - twirl_operator(action, rho)).norm();
    return {r <= tol, r};
}

}  // namespace asym
