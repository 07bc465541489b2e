#include <doctest.h>

#include "asym/monotones.hpp"
#include "asym/random.hpp"
#include "oracles.hpp"

using namespace asym;

namespace {

DensityMatrix plus() { return DensityMatrix::pure(ComplexVector::Ones(2) / std::sqrt(2.0)); }

ComplexMatrix swap_unitary(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    ComplexMatrix s = ComplexMatrix::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) s(j * n + i, i * n + j) = 1.0;
    return s;
}

}  // namespace

TEST_CASE("qfi on fixed states") {
    const Hamiltonian z = Hamiltonian::pauli_z();
    CHECK(qfi(DensityMatrix::basis(2, 0), z) == doctest::Approx(0.0));
    CHECK(qfi(plus(), z) == doctest::Approx(4.0));
    CHECK(oracle::sld_fisher(plus().matrix(), z.matrix()) == doctest::Approx(4.0));
    Rng rng = trial_rng(8, 100, 0);
    CHECK(qfi(random_incoherent(z, rng), z) == doctest::Approx(0.0));
}

TEST_CASE("qfi matches the pure-state variance and SLD oracles") {
    for (std::uint64_t i = 0; i < 50; ++i) {
        Rng rng = trial_rng(8, 101, i);
        const std::size_t d = 2 + i % 3;
        std::vector<double> e(d);
        for (std::size_t k = 0; k < d; ++k) e[k] = static_cast<double>(k * k % 5);
        const Hamiltonian h = Hamiltonian::diagonal(e);
        const ComplexVector psi = random_pure_vector(d, rng);
        CHECK(qfi(DensityMatrix::pure(psi), h) == doctest::Approx(oracle::pure_state_fisher(psi, h.matrix())).epsilon(1e-9));
        const DensityMatrix rho = random_density(d, rng);
        CHECK(qfi(rho, h) == doctest::Approx(oracle::sld_fisher(rho.matrix(), h.matrix())).epsilon(1e-9));
    }
}

TEST_CASE("qfi is additive on product states") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        Rng rng = trial_rng(8, 102, i);
        const Hamiltonian ha = Hamiltonian::diagonal({0.0, 1.0});
        const Hamiltonian hb = Hamiltonian::diagonal({0.0, static_cast<double>(1 + i % 3)});
        const DensityMatrix a = random_density(2, rng), b = random_density(2, rng);
        CHECK(qfi(tensor(a, b), combined(ha, hb)) == doctest::Approx(qfi(a, ha) + qfi(b, hb)).epsilon(1e-10));
    }
}

TEST_CASE("qfi is monotone under covariant channels") {
    double worst = -1.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        Rng rng = trial_rng(8, 103, i);
        const std::size_t d = 2 + i % 3;
        std::vector<double> e(d);
        for (std::size_t k = 0; k < d; ++k) e[k] = static_cast<double>((k + i) % 3);
        const Hamiltonian h = Hamiltonian::diagonal(e);
        const GroupAction g = GroupAction::time_translation(h);
        const DensityMatrix rho = random_density(d, rng);
        const ChoiChannel ch = random_covariant_channel(g, g, rng);
        worst = std::max(worst, qfi(apply_channel(ch, rho), h) - qfi(rho, h));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("relative entropy of frameness") {
    const GroupAction z = GroupAction::time_translation(Hamiltonian::pauli_z());
    CHECK(rel_entropy_frameness(z, DensityMatrix::basis(2, 1)) == doctest::Approx(0.0));
    CHECK(rel_entropy_frameness(z, plus()) == doctest::Approx(std::log(2.0)));
    // Independent evaluation: S(twirl) - S(rho).
    Rng rng = trial_rng(8, 104, 0);
    const DensityMatrix rho = random_density(3, rng);
    const GroupAction g = GroupAction::time_translation(Hamiltonian::diagonal({0.0, 1.0, 2.0}));
    CHECK(rel_entropy_frameness(g, rho) ==
          doctest::Approx(von_neumann_entropy(twirl_state(g, rho)) - von_neumann_entropy(rho)).epsilon(1e-9));

    double worst = -1.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        Rng r2 = trial_rng(8, 105, i);
        const DensityMatrix s = random_density(3, r2);
        const ChoiChannel ch = random_covariant_channel(g, g, r2);
        worst = std::max(worst, rel_entropy_frameness(g, apply_channel(ch, s)) - rel_entropy_frameness(g, s));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("free energy") {
    const Hamiltonian h = Hamiltonian::diagonal({0.0, 1.0});
    const double beta = std::log(2.0);
    CHECK(free_energy(DensityMatrix::basis(2, 1), h, beta) == doctest::Approx(1.0));
    CHECK(free_energy(DensityMatrix::maximally_mixed(2), h, beta) == doctest::Approx(0.5 - std::log(2.0) / beta));
    const double z = 1.0 + std::exp(-beta);
    CHECK(free_energy(gibbs_state(h, beta), h, beta) == doctest::Approx(-std::log(z) / beta));
}

TEST_CASE("cloning chain report") {
    const Hamiltonian h = Hamiltonian::diagonal({0.0, 1.0});
    Rng rng = trial_rng(8, 106, 0);
    const DensityMatrix rho_r = random_density(2, rng);
    const DensityMatrix rho_s = random_incoherent(h, rng);

    const CloningChainReport id = verify_cloning_chain(ChoiChannel::identity(4), rho_r, h, rho_s, h);
    CHECK(id.fisher_s_out == doctest::Approx(0.0));
    CHECK(id.verdict == "cloning excluded");
    CHECK(id.fisher_joint_in == doctest::Approx(qfi(rho_r, h)));

    const CloningChainReport sw = verify_cloning_chain(ChoiChannel::from_unitary(swap_unitary(2)), rho_r, h, rho_s, h);
    CHECK(sw.r_marginal_change > 0.01);
    CHECK(sw.chain_slack >= -1e-9);
    CHECK(sw.verdict == "monotone");

    CHECK_THROWS_AS(verify_cloning_chain(ChoiChannel::identity(4), rho_r, h, DensityMatrix::pure(ComplexVector::Ones(2) / std::sqrt(2.0)), h),
                    ValidationError);
    ComplexMatrix had = ComplexMatrix::Ones(2, 2) / std::sqrt(2.0);
    had(1, 1) *= -1.0;
    CHECK_THROWS_AS(verify_cloning_chain(ChoiChannel::from_unitary(kron(had, had)), rho_r, h, rho_s, h), ValidationError);

    double worst = -1.0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        Rng r2 = trial_rng(8, 107, i);
        const GroupAction g = GroupAction::time_translation(h);
        const ChoiChannel ch = random_covariant_channel(tensor(g, g), tensor(g, g), r2);
        const CloningChainReport rep = verify_cloning_chain(ch, random_density(2, r2), h, random_incoherent(h, r2), h);
        worst = std::max(worst, -rep.chain_slack);
        CHECK(rep.verdict != "violation");
    }
    CHECK(worst <= 1e-8);
}
