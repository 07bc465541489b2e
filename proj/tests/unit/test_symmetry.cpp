#include <doctest.h>

#include <numbers>

#include "asym/protocols.hpp"
#include "asym/random.hpp"
#include "asym/symmetry.hpp"
#include "oracles.hpp"

using namespace asym;

namespace {

const double kPi = std::numbers::pi;

DensityMatrix plus() { return DensityMatrix::pure(ComplexVector::Ones(2) / std::sqrt(2.0)); }

/// Channel average over a fine time grid, as an independent estimate of the twirl.
ComplexMatrix grid_twirl_choi(const std::vector<double>& e_in, const std::vector<double>& e_out, const ComplexMatrix& choi,
                              int points) {
    ComplexMatrix acc = ComplexMatrix::Zero(choi.rows(), choi.cols());
    for (int k = 0; k < points; ++k) {
        const double t = 2 * kPi * k / points;
        const ComplexMatrix w = oracle::kron(oracle::phase(e_in, t).conjugate(), oracle::phase(e_out, t));
        acc += w * choi * w.adjoint();
    }
    return acc / static_cast<double>(points);
}

}  // namespace

TEST_CASE("group actions") {
    const GroupAction tt = GroupAction::time_translation(Hamiltonian::diagonal({0.0, 1.0}));
    CHECK_FALSE(tt.is_finite());
    CHECK((tt.unitary(0.0) - identity(2)).norm() < 1e-15);
    CHECK((orbit_state(tt, plus(), 0.0).matrix() - plus().matrix()).norm() < 1e-15);

    const DensityMatrix minus = DensityMatrix::pure(Eigen::Vector2cd(1.0, -1.0) / std::sqrt(2.0));
    CHECK((orbit_state(tt, plus(), kPi).matrix() - minus.matrix()).norm() < 1e-14);

    Rng rng = trial_rng(7, 100, 0);
    const Hamiltonian h3 = Hamiltonian::diagonal({0.0, 1.0, 3.0});
    const DensityMatrix inc = random_incoherent(h3, rng);
    const GroupAction t3 = GroupAction::time_translation(h3);
    CHECK((orbit_state(t3, inc, 0.731).matrix() - inc.matrix()).norm() < 1e-14);

    CHECK_THROWS_AS(GroupAction::time_translation(Hamiltonian::diagonal({0.0, 0.5})), ValidationError);

    const GroupAction s3 = GroupAction::permutation(3);
    CHECK(s3.order() == 6);
    const GroupAction z4 = GroupAction::cyclic_phases(4, Hamiltonian::diagonal({0.0, 1.0}));
    CHECK(z4.order() == 4);
    ComplexMatrix g = identity(2);
    for (int k = 0; k < 4; ++k) g = g * z4.unitary(std::size_t{1});
    CHECK((g - identity(2)).norm() < 1e-12);
    CHECK_THROWS_AS(GroupAction::finite_cyclic(3, Hamiltonian::pauli_z().matrix()), ValidationError);
}

TEST_CASE("twirl_state fixes symmetric states and dephases") {
    const GroupAction z = GroupAction::time_translation(Hamiltonian::pauli_z());
    CHECK((twirl_state(z, plus()).matrix() - identity(2) / 2.0).norm() < 1e-14);
    CHECK((twirl_state(z, DensityMatrix::basis(2, 0)).matrix() - DensityMatrix::basis(2, 0).matrix()).norm() < 1e-15);

    // Independent time average on a 10^4 point grid.
    ComplexMatrix avg = ComplexMatrix::Zero(2, 2);
    const int points = 10000;
    for (int k = 0; k < points; ++k) {
        const ComplexMatrix u = oracle::phase({1.0, -1.0}, 2 * kPi * k / points);
        avg += u * plus().matrix() * u.adjoint();
    }
    CHECK((avg / static_cast<double>(points) - identity(2) / 2.0).norm() < 1e-12);

    // Explicit six-term average for S3 on |0><0|.
    const GroupAction s3 = GroupAction::permutation(3);
    ComplexMatrix six = ComplexMatrix::Zero(3, 3);
    for (std::size_t k = 0; k < 6; ++k) {
        const ComplexMatrix u = s3.unitary(k);
        six += u * DensityMatrix::basis(3, 0).matrix() * u.adjoint();
    }
    CHECK((six / 6.0 - identity(3) / 3.0).norm() < 1e-15);
    CHECK((twirl_state(s3, DensityMatrix::basis(3, 0)).matrix() - identity(3) / 3.0).norm() < 1e-14);
}

TEST_CASE("twirl_choi is the covariant projection") {
    Rng rng = trial_rng(7, 101, 0);
    const std::vector<double> ein{0.0, 1.0, 2.0}, eout{0.0, 1.0};
    const GroupAction in = GroupAction::time_translation(Hamiltonian::diagonal(ein));
    const GroupAction out = GroupAction::time_translation(Hamiltonian::diagonal(eout));
    const ChoiChannel ch = random_channel(3, 2, rng);
    const ComplexMatrix tw = twirl_choi(in, out, ch.choi());
    // Frequencies are integers in [-4, 4]; a 16-point average is exact.
    CHECK((tw - grid_twirl_choi(ein, eout, ch.choi(), 16)).norm() < 1e-12);
    CHECK((twirl_choi(in, out, tw) - tw).norm() < 1e-10);

    const ChoiChannel twc = twirl_channel(in, out, ch);
    CHECK(is_covariant(twc, in, out, 1e-9).holds);
    CHECK((twirl_channel(in, out, twc).choi() - twc.choi()).norm() < 1e-10);

    const GroupAction q = GroupAction::time_translation(Hamiltonian::diagonal({0.0, 1.0}));
    const ChoiChannel id = ChoiChannel::identity(2);
    CHECK((twirl_channel(q, id).choi() - id.choi()).norm() < 1e-15);
}

TEST_CASE("covariance predicate") {
    const GroupAction z = GroupAction::time_translation(Hamiltonian::pauli_z());
    const PredicateResult id = is_covariant(ChoiChannel::identity(2), z, 1e-12);
    CHECK(id.holds);
    CHECK(id.residual == 0.0);

    const ChoiChannel had = ChoiChannel::from_unitary(hadamard());
    const PredicateResult h = is_covariant(had, z, 1e-9);
    CHECK_FALSE(h.holds);
    CHECK(h.residual > 0.1);

    // Its twirl is covariant and cannot create coherence from |0>.
    const ChoiChannel twh = twirl_channel(z, had);
    CHECK(is_covariant(twh, z, 1e-9).holds);
    CHECK(coherence_magnitude(apply_channel(twh, DensityMatrix::basis(2, 0)), Hamiltonian::pauli_z()) < 1e-12);

    const GroupAction s3 = GroupAction::permutation(3);
    CHECK(is_covariant(permutation_broadcast_channel(3), tensor(s3, s3), 1e-12).residual < 1e-12);
}

TEST_CASE("symmetric inputs stay symmetric under covariant channels") {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        Rng rng = trial_rng(7, 102, i);
        const std::size_t d = 2 + i % 3;
        std::vector<double> e(d);
        for (std::size_t k = 0; k < d; ++k) e[k] = static_cast<double>((k * (i + 1)) % 4);
        const GroupAction g = GroupAction::time_translation(Hamiltonian::diagonal(e));
        const DensityMatrix rho = twirl_state(g, random_density(d, rng));
        const ChoiChannel ch = random_covariant_channel(g, g, rng);
        worst = std::max(worst, is_symmetric(g, apply_channel(ch, rho).matrix(), 1e-9).residual);
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("Bohr mode index") {
    const BohrModeIndex modes = bohr_modes(Hamiltonian::diagonal({0.0, 1.0, 1.0}));
    std::size_t members = 0;
    for (const auto& m : modes.members) members += m.size();
    CHECK(members == 9);
    CHECK(modes.frequencies.size() == 3);
}

TEST_CASE("energy-conserving random unitaries commute with H") {
    Rng rng = trial_rng(7, 103, 0);
    const std::vector<double> e{0.0, 1.0, 1.0, 2.0};
    const ComplexMatrix u = random_energy_conserving_unitary(e, rng);
    const ComplexMatrix h = Hamiltonian::diagonal(e).matrix();
    CHECK((u * h - h * u).norm() < 1e-12);
    CHECK(unitarity_defect(u) < 1e-12);
}
