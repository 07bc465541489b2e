#include <doctest.h>

#include <array>

#include "asym/linalg.hpp"
#include "asym/random.hpp"
#include "oracles.hpp"

using namespace asym;

namespace {

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

}  // namespace

TEST_CASE("eig_hermitian on small fixed matrices") {
    const EigenSystem id = eig_hermitian(identity(2));
    CHECK(id.values(0) == doctest::Approx(1.0));
    CHECK(id.values(1) == doctest::Approx(1.0));

    const EigenSystem z = eig_hermitian(pauli_z());
    CHECK(z.values(0) == doctest::Approx(1.0));
    CHECK(z.values(1) == doctest::Approx(-1.0));
    CHECK(std::abs(z.vectors(0, 0)) == doctest::Approx(1.0));

    const EigenSystem x = eig_hermitian(pauli_x());
    CHECK(x.values(0) == doctest::Approx(1.0));
    CHECK(x.values(1) == doctest::Approx(-1.0));
    const ComplexMatrix rebuilt = x.vectors * x.values.cast<Complex>().asDiagonal() * x.vectors.adjoint();
    CHECK((rebuilt - pauli_x()).norm() < 1e-12);
    CHECK(std::abs(x.vectors(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("eig_hermitian reconstructs random Hermitian matrices") {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        Rng rng = trial_rng(5, 100, i);
        const std::size_t d = 1 + (i * 7) % 64;
        const ComplexMatrix h = random_hermitian(d, rng);
        const EigenSystem es = eig_hermitian(h);
        const ComplexMatrix rebuilt = es.vectors * es.values.cast<Complex>().asDiagonal() * es.vectors.adjoint();
        worst = std::max(worst, (h - rebuilt).norm());
        for (Eigen::Index k = 1; k < es.values.size(); ++k) REQUIRE(es.values(k) <= es.values(k - 1));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
    ComplexMatrix m(2, 2);
    m << 0, 1, 0, 0;
    CHECK_THROWS_AS(eig_hermitian(m), ValidationError);
}

TEST_CASE("spectral_clusters merges degenerate eigenvalues") {
    const ComplexMatrix h = Eigen::Vector3d(2.0, 2.0, -1.0).cast<Complex>().asDiagonal();
    const auto clusters = spectral_clusters(eig_hermitian(h));
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].multiplicity == 2);
    CHECK(clusters[0].value == doctest::Approx(2.0));
    CHECK(clusters[1].multiplicity == 1);
}

TEST_CASE("kron agrees with the index-loop oracle") {
    Rng rng = trial_rng(5, 101, 0);
    const ComplexMatrix a = random_ginibre(2, 3, rng), b = random_ginibre(3, 2, rng);
    CHECK((kron(a, b) - oracle::kron(a, b)).norm() < 1e-14);

    const ComplexMatrix one_b = kron(identity(2), b);
    CHECK((one_b.block(0, 0, 3, 2) - b).norm() == 0.0);
    CHECK((one_b.block(3, 2, 3, 2) - b).norm() == 0.0);

    const ComplexMatrix zz = kron(pauli_z(), pauli_z());
    CHECK(zz(0, 0) == Complex(1.0));
    CHECK(zz(3, 3) == Complex(1.0));
    CHECK(zz(1, 1) == Complex(-1.0));

    const ComplexMatrix c = random_ginibre(2, 2, rng), d = random_ginibre(2, 2, rng);
    const ComplexMatrix p = random_ginibre(2, 2, rng), q = random_ginibre(2, 2, rng);
    CHECK((kron(c, d) * kron(p, q) - kron(c * p, d * q)).norm() < 1e-12);

    const std::array<ComplexMatrix, 3> factors{c, d, p};
    CHECK((kron(std::span<const ComplexMatrix>(factors)) - oracle::kron(oracle::kron(c, d), p)).norm() < 1e-12);
}

TEST_CASE("partial_trace of products and entangled states") {
    Rng rng = trial_rng(5, 102, 0);
    const ComplexMatrix ra = random_density(2, rng).matrix();
    const ComplexMatrix rb = random_density(3, rng).matrix();
    const Dims dims{2, 3};
    const std::array<std::size_t, 1> keep_a{0}, keep_b{1};
    CHECK((partial_trace(kron(ra, rb), dims, keep_a) - ra).norm() < 1e-13);
    CHECK((partial_trace(kron(ra, rb), dims, keep_b) - rb).norm() < 1e-13);

    const ComplexMatrix m = random_ginibre(6, 6, rng);
    CHECK((partial_trace(m, dims, keep_a) - oracle::trace_second(m, 2, 3)).norm() < 1e-13);
    CHECK((partial_trace(m, dims, keep_b) - oracle::trace_first(m, 2, 3)).norm() < 1e-13);

    const std::span<const std::size_t> none;
    const ComplexMatrix all = partial_trace(m, dims, none);
    REQUIRE(all.rows() == 1);
    CHECK(std::abs(all(0, 0) - m.trace()) < 1e-13);

    ComplexVector bell = ComplexVector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const Dims qubits{2, 2};
    CHECK((partial_trace(bell * bell.adjoint(), qubits, keep_b) - identity(2) / 2.0).norm() < 1e-15);
}

TEST_CASE("permute_subsystems swaps tensor factors") {
    Rng rng = trial_rng(5, 103, 0);
    const ComplexMatrix a = random_ginibre(2, 2, rng), b = random_ginibre(3, 3, rng);
    const Dims dims{2, 3};
    const std::array<std::size_t, 2> swap{1, 0};
    CHECK((permute_subsystems(kron(a, b), dims, swap) - kron(b, a)).norm() < 1e-13);
}

TEST_CASE("norms of fixed matrices") {
    const Norms zero = norms(ComplexMatrix::Zero(3, 3));
    CHECK(zero.frobenius == 0.0);
    CHECK(zero.trace_norm == 0.0);
    CHECK(zero.operator_norm == 0.0);

    const Norms x = norms(pauli_x());
    CHECK(x.frobenius == doctest::Approx(std::sqrt(2.0)));
    CHECK(x.trace_norm == doctest::Approx(2.0));
    CHECK(x.operator_norm == doctest::Approx(1.0));

    Rng rng = trial_rng(5, 104, 0);
    CHECK(trace_norm(random_density(4, rng).matrix()) == doctest::Approx(1.0));
    CHECK(trace_distance(DensityMatrix::basis(2, 0).matrix(), DensityMatrix::basis(2, 1).matrix()) == doctest::Approx(1.0));
}

TEST_CASE("hermitian_function applies scalar functions spectrally") {
    Rng rng = trial_rng(5, 105, 0);
    const ComplexMatrix rho = random_density(3, rng).matrix();
    const ComplexMatrix root = hermitian_function(eig_hermitian(rho), [](double x) { return std::sqrt(std::max(x, 0.0)); });
    CHECK((root * root - rho).norm() < 1e-12);
}

TEST_CASE("defect helpers") {
    CHECK(hermiticity_defect(pauli_x()) == 0.0);
    CHECK(unitarity_defect(pauli_x()) < 1e-15);
    ComplexMatrix m = pauli_x();
    m(0, 0) = std::nan("");
    CHECK_FALSE(all_finite(m));
}
