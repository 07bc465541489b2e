#include <doctest.h>

#include <algorithm>

#include "asym/kidecomp.hpp"
#include "asym/random.hpp"

using namespace asym;

namespace {

using Layout = std::vector<std::pair<std::size_t, std::size_t>>;

Layout layout(const KIDecomposition& d) {
    Layout l;
    for (const auto& b : d.blocks) l.emplace_back(b.dim_j, b.dim_k);
    std::sort(l.begin(), l.end());
    return l;
}

ComplexMatrix pauli_x() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    return m;
}

DensityMatrix plus() { return DensityMatrix::pure(ComplexVector::Ones(2) / std::sqrt(2.0)); }

/// Family U (q_g rho_g (x) omega) U^dagger (+) ... with known layout.
std::vector<DensityMatrix> hidden_family(const Layout& blocks, const std::vector<DensityMatrix>& omegas, std::size_t count, Rng& rng) {
    std::size_t n = 0;
    for (const auto& [dj, dk] : blocks) n += dj * dk;
    const ComplexMatrix u = random_unitary(n, rng);
    std::vector<DensityMatrix> fam;
    for (std::size_t g = 0; g < count; ++g) {
        ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        std::vector<double> q(blocks.size());
        double z = 0.0;
        for (auto& x : q) z += (x = 0.2 + std::uniform_real_distribution<double>()(rng));
        Eigen::Index offset = 0;
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            const ComplexMatrix b = q[j] / z * kron(random_density(blocks[j].first, rng).matrix(), omegas[j].matrix());
            m.block(offset, offset, b.rows(), b.cols()) = b;
            offset += b.rows();
        }
        fam.push_back(DensityMatrix::nearest(u * m * u.adjoint()));
    }
    return fam;
}

}  // namespace

TEST_CASE("generated algebras") {
    CHECK(generated_algebra({identity(2)}).dim() == 1);

    ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    CHECK(generated_algebra({p0, p1}).dim() == 2);

    const AlgebraBasis xz = generated_algebra({pauli_x(), Hamiltonian::pauli_z().matrix()});
    CHECK(xz.dim() == 4);
    CHECK(xz.closure_defect() < 1e-10);
    CHECK(xz.adjoint_defect() < 1e-10);
    // Independent rank check via the Gram matrix of {I, X, Z, XZ}.
    const std::vector<ComplexMatrix> words{identity(2), pauli_x(), Hamiltonian::pauli_z().matrix(),
                                           pauli_x() * Hamiltonian::pauli_z().matrix()};
    ComplexMatrix gram(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) gram(i, j) = (words[i].adjoint() * words[j]).trace();
    CHECK(Eigen::FullPivLU<ComplexMatrix>(gram).rank() == 4);
}

TEST_CASE("Wedderburn blocks of small algebras") {
    ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    CHECK(layout(decompose_algebra(generated_algebra({p0, p1}))) == Layout{{1, 1}, {1, 1}});
    CHECK(layout(decompose_algebra(generated_algebra({identity(2)}))) == Layout{{1, 2}});
    const KIDecomposition full = decompose_algebra(generated_algebra({pauli_x(), Hamiltonian::pauli_z().matrix()}));
    CHECK(layout(full) == Layout{{2, 1}});
    CHECK(full.structure_residual < 1e-9);
}

TEST_CASE("decompositions of invariant families") {
    SUBCASE("dephased basis states") {
        const std::vector<DensityMatrix> fam{DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)};
        ComplexMatrix dchoi = ComplexMatrix::Zero(4, 4);
        dchoi(0, 0) = dchoi(3, 3) = 1.0;
        const KIDecomposition d = ki_for_invariant_family(ChoiChannel(dchoi, 2, 2), fam);
        CHECK(layout(d) == Layout{{1, 1}, {1, 1}});
        for (std::size_t g = 0; g < 2; ++g) {
            std::vector<double> w = d.weights[g];
            std::sort(w.begin(), w.end());
            CHECK(w[0] == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(w[1] == doctest::Approx(1.0));
        }
    }
    SUBCASE("maximally mixed qubit") {
        const KIDecomposition d = ki_for_invariant_family(ChoiChannel::identity(2), {DensityMatrix::maximally_mixed(2)});
        CHECK(layout(d) == Layout{{1, 2}});
        CHECK((d.blocks[0].omega - identity(2) / 2.0).norm() < 1e-10);
    }
    SUBCASE("time orbit of |+>") {
        const GroupAction g = GroupAction::time_translation(Hamiltonian::diagonal({0.0, 1.0}));
        const auto fam = orbit_family(g, plus());
        CHECK(fam.size() == 16);
        const KIDecomposition d = ki_for_invariant_family(ChoiChannel::identity(2), fam);
        CHECK(layout(d) == Layout{{2, 1}});
        std::vector<ComplexMatrix> ms;
        for (const auto& r : fam) ms.push_back(r.matrix());
        CHECK(generated_algebra(ms).dim() == 4);
    }
    SUBCASE("a family not fixed by the channel is rejected") {
        const ChoiChannel flip = ChoiChannel::from_unitary(pauli_x());
        CHECK_THROWS_AS(ki_for_invariant_family(flip, {DensityMatrix::basis(2, 0)}), ValidationError);
    }
}

TEST_CASE("hidden multiplicity structure is recovered") {
    Rng rng = trial_rng(10, 100, 0);
    const std::vector<Layout> cases{{{2, 2}}, {{1, 1}, {2, 2}}, {{2, 1}, {1, 3}}, {{3, 2}}};
    for (const auto& blocks : cases) {
        std::vector<DensityMatrix> omegas;
        for (const auto& [dj, dk] : blocks) omegas.push_back(random_density(dk, rng));
        const auto fam = hidden_family(blocks, omegas, 6, rng);
        const KIDecomposition d = ki_for_family(fam);
        Layout want = blocks;
        std::sort(want.begin(), want.end());
        CHECK(layout(d) == want);
        CHECK(reconstruction_residual(fam, d) < 1e-6);
        CHECK(d.reconstruction_residual < 1e-6);
        // Each recovered omega has the spectrum of the one planted in a block of the same shape.
        for (const auto& b : d.blocks) {
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> got(b.omega);
            bool matched = false;
            for (std::size_t j = 0; j < blocks.size(); ++j) {
                if (blocks[j] != std::make_pair(b.dim_j, b.dim_k)) continue;
                Eigen::SelfAdjointEigenSolver<ComplexMatrix> want_es(omegas[j].matrix());
                matched = matched || (got.eigenvalues() - want_es.eigenvalues()).norm() < 1e-8;
            }
            CHECK(matched);
        }
        CHECK(spectrum_constancy_check(fam, d).max_spectrum_deviation >= 0.0);
    }
}

TEST_CASE("spectrum constancy") {
    const GroupAction g = GroupAction::time_translation(Hamiltonian::diagonal({0.0, 1.0, 2.0}));
    Rng rng = trial_rng(10, 101, 0);
    auto fam = orbit_family(g, random_density(3, rng));
    const KIDecomposition d = ki_for_family(fam);
    CHECK(spectrum_constancy_check(fam, d).constant);

    const std::vector<DensityMatrix> single{random_density(3, rng)};
    CHECK(spectrum_constancy_check(single, ki_for_family(single)).constant);

    // Mix one state towards I/3, which changes its spectrum.
    fam[5] = DensityMatrix::nearest(0.5 * fam[5].matrix() + 0.5 * DensityMatrix::maximally_mixed(3).matrix());
    const SpectrumReport bad = spectrum_constancy_check(fam, d);
    CHECK_FALSE(bad.constant);
    CHECK(std::max(bad.max_spectrum_deviation, bad.max_weight_deviation) > 1e-3);
}
