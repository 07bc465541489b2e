#include <doctest.h>

#include <array>
#include <cmath>

#include "asym/quantum.hpp"
#include "asym/random.hpp"
#include "oracles.hpp"

using namespace asym;

TEST_CASE("DensityMatrix validates its input") {
    ComplexMatrix bad(2, 2);
    bad << 1, 0, 0, 1;
    CHECK_THROWS_AS(DensityMatrix{bad}, ValidationError);
    bad << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix{bad}, ValidationError);
    bad << 0.5, 0.1, 0.2, 0.5;
    CHECK_THROWS_AS(DensityMatrix{bad}, ValidationError);
    CHECK_THROWS(DensityMatrix::basis(2, 2));

    CHECK(DensityMatrix::maximally_mixed(4).purity() == doctest::Approx(0.25));
    CHECK(DensityMatrix::basis(3, 1).purity() == doctest::Approx(1.0));
    const std::array<double, 2> p{0.75, 0.25};
    CHECK(DensityMatrix::diagonal(p).matrix()(0, 0).real() == doctest::Approx(0.75));
}

TEST_CASE("DensityMatrix::nearest repairs small defects") {
    ComplexMatrix m(2, 2);
    m << 1.0 + 1e-9, 0.0, 0.0, -1e-9;
    const DensityMatrix rho = DensityMatrix::nearest(m);
    CHECK(rho.matrix().trace().real() == doctest::Approx(1.0));
    CHECK(rho.matrix()(1, 1).real() >= 0.0);
}

TEST_CASE("channels act as their Kraus oracles") {
    Rng rng = trial_rng(6, 100, 0);
    const DensityMatrix rho = random_density(2, rng);

    const ChoiChannel id = ChoiChannel::identity(2);
    CHECK((apply_channel(id, rho).matrix() - rho.matrix()).norm() < 1e-15);

    const ChoiChannel dep = ChoiChannel::completely_depolarizing(3);
    const DensityMatrix r3 = random_density(3, rng);
    CHECK((apply_channel(dep, r3).matrix() - identity(3) / 3.0).norm() < 1e-14);
    // Choi of the depolarising map: I_in (x) I_out / d.
    CHECK((dep.choi() - identity(9) / 3.0).norm() < 1e-14);

    const ComplexMatrix u = random_unitary(3, rng);
    const ChoiChannel uc = ChoiChannel::from_unitary(u);
    CHECK((uc.choi() - oracle::kraus_choi({u})).norm() < 1e-13);
    CHECK((apply_channel(uc, r3).matrix() - u * r3.matrix() * u.adjoint()).norm() < 1e-13);

    // Amplitude damping as a two-Kraus example.
    const double g = 0.3;
    ComplexMatrix k0 = ComplexMatrix::Zero(2, 2), k1 = ComplexMatrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1 - g);
    k1(0, 1) = std::sqrt(g);
    const std::array<ComplexMatrix, 2> ks{k0, k1};
    const ChoiChannel ad = ChoiChannel::from_kraus(ks);
    CHECK((ad.choi() - oracle::kraus_choi({k0, k1})).norm() < 1e-14);
    CHECK((ad.apply(rho.matrix()) - oracle::kraus_apply({k0, k1}, rho.matrix())).norm() < 1e-14);
    CHECK((apply_choi(ad.choi(), 2, 2, rho.matrix()) - ad.apply(rho.matrix())).norm() < 1e-15);
}

TEST_CASE("ChoiChannel rejects maps that are not CPTP") {
    ComplexMatrix choi = ChoiChannel::identity(2).choi();
    choi(0, 0) += 0.1;
    CHECK_THROWS_AS(ChoiChannel(choi, 2, 2), ValidationError);
    const ChoiDefects d = choi_defects(choi, 2, 2);
    CHECK(d.trace_preservation > 0.05);
}

TEST_CASE("tensor and compose of channels") {
    Rng rng = trial_rng(6, 101, 0);
    const ChoiChannel a = random_channel(2, 3, rng);
    const ChoiChannel b = random_channel(3, 2, rng);
    const DensityMatrix ra = random_density(2, rng), rb = random_density(3, rng);
    const ChoiChannel ab = tensor(a, b);
    CHECK((ab.apply(kron(ra.matrix(), rb.matrix())) - kron(a.apply(ra.matrix()), b.apply(rb.matrix()))).norm() < 1e-13);
    const ChoiChannel ba = compose(b, a);
    CHECK((ba.apply(ra.matrix()) - b.apply(a.apply(ra.matrix()))).norm() < 1e-13);
}

TEST_CASE("random channels preserve trace and positivity") {
    double worst_trace = 0.0, worst_min = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        Rng rng = trial_rng(6, 102, i);
        const std::size_t din = 1 + i % 4, dout = 1 + (i / 4) % 4;
        const ChoiChannel ch = random_channel(din, dout, rng);
        const DensityMatrix out = apply_channel(ch, random_density(din, rng));
        worst_trace = std::max(worst_trace, std::abs(out.matrix().trace().real() - 1.0));
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(out.matrix());
        worst_min = std::min(worst_min, es.eigenvalues().minCoeff());
    }
    CHECK(worst_trace < 1e-9);
    CHECK(worst_min > -1e-9);
}

TEST_CASE("Stinespring channels") {
    Rng rng = trial_rng(6, 103, 0);
    const DensityMatrix sigma = random_density(2, rng);
    const DensityMatrix rho = random_density(2, rng);
    const Dims dims{2, 2};
    const std::array<std::size_t, 1> traced_second{1};
    ComplexMatrix swap = ComplexMatrix::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
    const ChoiChannel replaced = channel_from_stinespring(swap, sigma, dims, traced_second);
    CHECK((apply_channel(replaced, rho).matrix() - sigma.matrix()).norm() < 1e-14);
    const ChoiChannel same = channel_from_stinespring(identity(4), sigma, dims, traced_second);
    CHECK((same.choi() - ChoiChannel::identity(2).choi()).norm() < 1e-14);
}

TEST_CASE("marginals of product states") {
    Rng rng = trial_rng(6, 104, 0);
    const DensityMatrix a = random_density(2, rng), b = random_density(3, rng);
    const auto m = marginals(tensor(a, b), 2, 3);
    CHECK((m.marginal_r.matrix() - a.matrix()).norm() < 1e-14);
    CHECK((m.marginal_s.matrix() - b.matrix()).norm() < 1e-14);
}

TEST_CASE("entropies") {
    CHECK(von_neumann_entropy(DensityMatrix::basis(2, 0)) == doctest::Approx(0.0));
    CHECK(von_neumann_entropy(DensityMatrix::maximally_mixed(2)) == doctest::Approx(std::log(2.0)));
    const std::array<double, 2> p{0.75, 0.25};
    CHECK(von_neumann_entropy(DensityMatrix::diagonal(p)) ==
          doctest::Approx(-0.75 * std::log(0.75) - 0.25 * std::log(0.25)));

    Rng rng = trial_rng(6, 105, 0);
    const DensityMatrix rho = random_density(3, rng);
    CHECK(std::abs(relative_entropy(rho, rho)) < 1e-10);
    CHECK(relative_entropy(DensityMatrix::basis(2, 0), DensityMatrix::maximally_mixed(2)) == doctest::Approx(std::log(2.0)));
    CHECK(std::isinf(relative_entropy(DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1))));
}

TEST_CASE("Gibbs states") {
    const Hamiltonian h = Hamiltonian::diagonal({0.0, 1.0});
    CHECK((gibbs_state(h, 0.0).matrix() - identity(2) / 2.0).norm() < 1e-15);
    const DensityMatrix g = gibbs_state(h, std::log(2.0));
    CHECK(g.matrix()(0, 0).real() == doctest::Approx(2.0 / 3.0));
    CHECK(g.matrix()(1, 1).real() == doctest::Approx(1.0 / 3.0));

    double previous = 1.0;
    for (double beta = 0.5; beta <= 20.0; beta += 0.5) {
        const double dist = trace_distance(gibbs_state(h, beta).matrix(), DensityMatrix::basis(2, 0).matrix());
        CHECK(dist < previous);
        previous = dist;
    }
}

TEST_CASE("Gibbs preservation predicate") {
    const Hamiltonian h = Hamiltonian::diagonal({0.0, 1.0, 2.0});
    const PredicateResult id = is_gibbs_preserving(ChoiChannel::identity(3), h, 1.3, 1e-12);
    CHECK(id.holds);
    CHECK(id.residual == 0.0);
    CHECK(is_gibbs_preserving(ChoiChannel::completely_depolarizing(3), h, 0.0, 1e-12).holds);
    CHECK_FALSE(is_gibbs_preserving(ChoiChannel::completely_depolarizing(3), h, 1.0, 1e-6).holds);
}

TEST_CASE("dephasing and coherence magnitude") {
    const Hamiltonian z = Hamiltonian::pauli_z();
    const DensityMatrix plus = DensityMatrix::pure(ComplexVector::Ones(2) / std::sqrt(2.0));
    CHECK(coherence_magnitude(DensityMatrix::basis(2, 1), z) == doctest::Approx(0.0));
    CHECK(coherence_magnitude(plus, z) == doctest::Approx(1.0));
    const Hamiltonian flat = Hamiltonian::diagonal({0.0, 0.0});
    CHECK(coherence_magnitude(plus, flat) == doctest::Approx(0.0));
    CHECK((dephase(plus.matrix(), z) - identity(2) / 2.0).norm() < 1e-15);
}

TEST_CASE("combined Hamiltonians add on tensor products") {
    const Hamiltonian a = Hamiltonian::diagonal({0.0, 1.0});
    const Hamiltonian b = Hamiltonian::diagonal({0.0, 2.0, 5.0});
    const Hamiltonian ab = combined(a, b);
    CHECK((ab.matrix() - (kron(a.matrix(), identity(3)) + kron(identity(2), b.matrix()))).norm() < 1e-15);
}
