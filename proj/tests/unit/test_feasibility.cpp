#include <doctest.h>

#include "asym/feasibility.hpp"
#include "asym/protocols.hpp"
#include "asym/random.hpp"

using namespace asym;

namespace {

DensityMatrix plus() { return DensityMatrix::pure(ComplexVector::Ones(2) / std::sqrt(2.0)); }

GroupAction qubit_clock() { return GroupAction::time_translation(Hamiltonian::diagonal({0.0, 1.0})); }

FeasibilityProblem qubit_problem(SystemTarget target, double slack) {
    return FeasibilityProblem{qubit_clock(), qubit_clock(), plus(), DensityMatrix::basis(2, 0), target, slack, Tolerances{}};
}

/// Independent re-validation of a Feasible answer.
void check_sound(const FeasibilityProblem& p, const FeasibilityReport& rep) {
    REQUIRE(rep.choi_out);
    const ChoiChannel& ch = *rep.choi_out;
    const double tol = 2 * p.tol.feasible;
    const ChoiDefects d = choi_defects(ch.choi(), ch.dim_in(), ch.dim_out());
    CHECK(d.min_eigenvalue > -tol);
    CHECK(d.trace_preservation < tol);
    CHECK(is_covariant(ch, tensor(p.action_r, p.action_s), 10 * tol).holds);
    // The answer is only PSD to within the feasibility tolerance.
    const DensityMatrix out(ch.apply(tensor(p.rho_r, p.rho_s).matrix()), 10 * tol);
    const auto m = marginals(out, p.rho_r.dim(), p.rho_s.dim());
    CHECK(trace_distance(m.marginal_r.matrix(), p.rho_r.matrix()) <= p.reference_slack + 10 * tol);
    if (const auto* state = std::get_if<DensityMatrix>(&p.target)) {
        CHECK((m.marginal_s.matrix() - state->matrix()).norm() < 10 * tol);
    } else {
        const auto& c = std::get<CoherenceTarget>(p.target);
        CHECK(m.marginal_s.matrix()(c.row, c.col).real() >= c.value - 10 * tol);
    }
}

}  // namespace

TEST_CASE("project_psd clips negative eigenvalues") {
    Rng rng = trial_rng(9, 100, 0);
    const ComplexMatrix psd = random_density(3, rng).matrix();
    CHECK((project_psd(psd) - psd).norm() < 1e-12);

    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    ComplexMatrix want = ComplexMatrix::Zero(2, 2);
    want(0, 0) = 1.0;
    CHECK((project_psd(m) - want).norm() < 1e-15);

    const ComplexMatrix h = random_hermitian(4, rng);
    const ComplexMatrix p = project_psd(h);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h), ep(p);
    CHECK(ep.eigenvalues().minCoeff() > -1e-12);
    double neg = 0.0;
    for (Eigen::Index k = 0; k < 4; ++k) neg += std::pow(std::min(es.eigenvalues()(k), 0.0), 2);
    CHECK((h - p).norm() == doctest::Approx(std::sqrt(neg)).epsilon(1e-10));
}

TEST_CASE("real coordinates of Hermitian matrices are isometric") {
    Rng rng = trial_rng(9, 101, 0);
    const ComplexMatrix h = random_hermitian(5, rng);
    const Eigen::VectorXd v = hermitian_to_real(h);
    CHECK(v.size() == 25);
    CHECK(v.norm() == doctest::Approx(h.norm()));
    CHECK((real_to_hermitian(v, 5) - h).norm() < 1e-14);
}

TEST_CASE("affine projection") {
    const FeasibilityProblem p = qubit_problem(DensityMatrix::basis(2, 0), 0.0);
    const ConstraintSystem sys = assemble_constraints(p);
    CHECK(sys.inconsistency() < 1e-12);
    CHECK(sys.rank() > 0);
    CHECK(sys.channel_dim() == 4);

    const Eigen::VectorXd x = Eigen::VectorXd::Random(static_cast<Eigen::Index>(sys.variable_dim()));
    const Eigen::VectorXd once = sys.project_affine(x);
    CHECK(sys.constraint_residual(once) < 1e-10);
    CHECK((sys.project_affine(once) - once).norm() < 1e-12);

    // The identity channel lies on the set and is left alone.
    FeasibilityVariable id;
    id.choi = ChoiChannel::identity(4).choi();
    const Eigen::VectorXd on = sys.pack(id);
    CHECK((sys.project_affine(on) - on).norm() < 1e-10);

    // Projection of zero has the identity direction needed for trace preservation.
    FeasibilityVariable zero;
    zero.choi = ComplexMatrix::Zero(16, 16);
    const FeasibilityVariable back = sys.unpack(sys.project_affine(sys.pack(zero)));
    CHECK(back.choi.trace().real() == doctest::Approx(4.0));
}

TEST_CASE("qubit broadcasting problems") {
    SUBCASE("trivial target is met by the identity channel") {
        const FeasibilityProblem p = qubit_problem(DensityMatrix::basis(2, 0), 0.0);
        const FeasibilityReport rep = dykstra_feasibility(p);
        CHECK(rep.status == FeasibilityStatus::Feasible);
        check_sound(p, rep);
    }
    SUBCASE("coherence target 0.1 with R preserved stalls at a positive gap") {
        const FeasibilityProblem p = qubit_problem(CoherenceTarget{0.1, 0, 1}, 0.0);
        const FeasibilityReport rep = dykstra_feasibility(p);
        CHECK(rep.status == FeasibilityStatus::NumericallyInfeasible);
        CHECK(rep.gap_estimate > 1e-5);
        CHECK_FALSE(rep.choi_out);
    }
    SUBCASE("iteration cap gives Undecided") {
        FeasibilityProblem p = qubit_problem(CoherenceTarget{0.1, 0, 1}, 0.0);
        p.tol.max_iterations = 20;
        p.tol.newton = false;
        CHECK(dykstra_feasibility(p).status == FeasibilityStatus::Undecided);
    }
}

TEST_CASE("random covariant channels never broadcast coherence approximately") {
    // Cross-check of the infeasibility verdict: a random search over covariant
    // channels finds no output coherence near 0.1 while R stays within 1e-3.
    Rng rng = trial_rng(9, 103, 0);
    const GroupAction joint = tensor(qubit_clock(), qubit_clock());
    const DensityMatrix in = tensor(plus(), DensityMatrix::basis(2, 0));
    double best = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const ChoiChannel ch = random_covariant_channel(joint, joint, rng);
        const auto m = marginals(apply_channel(ch, in), 2, 2);
        if (trace_distance(m.marginal_r.matrix(), plus().matrix()) < 1e-3) best = std::max(best, std::abs(m.marginal_s.matrix()(0, 1)));
    }
    CHECK(best < 0.1);
}

TEST_CASE("permutation group broadcasting is feasible") {
    const GroupAction s3 = GroupAction::permutation(3);
    for (std::size_t j = 0; j < 3; ++j) {
        const DensityMatrix rj = DensityMatrix::basis(3, j);
        const FeasibilityProblem p{s3, s3, rj, DensityMatrix::maximally_mixed(3), rj, 0.0, Tolerances{}};
        const FeasibilityReport rep = dykstra_feasibility(p);
        REQUIRE(rep.status == FeasibilityStatus::Feasible);
        check_sound(p, rep);
        const ChoiChannel direct = permutation_broadcast_channel(3);
        for (std::size_t i = 0; i < 3; ++i) {
            const ComplexMatrix x = kron(DensityMatrix::basis(3, i).matrix(), DensityMatrix::maximally_mixed(3).matrix());
            CHECK((rep.choi_out->apply(x) - direct.apply(x)).norm() < 1e-6);
        }
    }
}

TEST_CASE("coherence scan over the reference slack") {
    FeasibilityProblem p = qubit_problem(CoherenceTarget{0.0, 0, 1}, 0.0);
    const std::vector<double> slacks{0.0, 0.05, 0.1, 0.25, 0.5, 1.0};
    const auto points = max_coherence_scan(p, slacks);
    REQUIRE(points.size() == slacks.size());
    CHECK(points.front().best <= 1e-3);
    CHECK(points.back().best >= 0.45);
    for (std::size_t k = 1; k < points.size(); ++k) CHECK(points[k].best >= points[k - 1].best - 1e-3);
    for (const auto& pt : points) CHECK(pt.best <= pt.upper);

    p.target = DensityMatrix::basis(2, 0);
    CHECK_THROWS_AS(max_coherence_scan(p, slacks), ValidationError);
}
