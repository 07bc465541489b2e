#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "asym/quantum.hpp"
#include "asym/symmetry.hpp"

namespace asym {

struct Tolerances {
    double feasible = 1e-7;
    double infeasible = 1e-5;
    std::size_t stall_window = 500;
    double stall_relative = 1e-9;
    std::size_t max_iterations = 50000;
    double pinv_cutoff = 1e-10;
    /// 0 runs the Dykstra iteration; k > 0 runs alternating projections with
    /// Anderson extrapolation over the last k steps.
    std::size_t anderson_memory = 0;
    /// Semismooth Newton steps on the squared PSD distance over the affine
    /// set, inserted after `warmup_iterations` projection steps. The
    /// verdict rules are unchanged; this only shortens the approach to the
    /// limiting residual.
    bool newton = true;
    std::size_t warmup_iterations = 200;
    std::size_t max_newton_steps = 100;
};

/// Require Re<i|rho'_S|j> >= value with Im<i|rho'_S|j> = 0.
struct CoherenceTarget {
    double value = 0.0;
    std::size_t row = 0;
    std::size_t col = 1;
};

using SystemTarget = std::variant<DensityMatrix, CoherenceTarget>;

/// Search for a covariant channel on R (x) S mapping rho_R (x) rho_S to a
/// joint state whose R marginal stays within trace distance `reference_slack`
/// of rho_R and whose S marginal meets `target`.
struct FeasibilityProblem {
    GroupAction action_r;
    GroupAction action_s;
    DensityMatrix rho_r;
    DensityMatrix rho_s;
    SystemTarget target;
    double reference_slack = 0.0;
    Tolerances tol{};
    /// Additionally force the joint output to equal rho_R (x) Tr_R(output).
    bool product_output = false;
    /// Starting Choi matrix; the maximally mixed covariant Choi when absent.
    std::optional<ComplexMatrix> initial_choi;
};

enum class FeasibilityStatus { Feasible, NumericallyInfeasible, Undecided };

const char* to_string(FeasibilityStatus s) noexcept;

struct FeasibilityReport {
    FeasibilityStatus status = FeasibilityStatus::Undecided;
    std::size_t iterations = 0;
    std::vector<double> residual_history;
    double gap_estimate = 0.0;
    /// Residual of the linear constraints alone; positive when they are
    /// inconsistent before positivity is even considered.
    double linear_residual = 0.0;
    std::optional<ChoiChannel> choi_out;
    std::string note;
};

/// Unknowns of the feasibility problem. Besides the Choi matrix: the positive
/// and negative parts of the change in the R marginal, the slack of the trace
/// budget, and the slack of the coherence bound. All are constrained PSD
/// (scalars non-negative); unused parts have size 0 or stay 0.
struct FeasibilityVariable {
    ComplexMatrix choi;
    ComplexMatrix reference_up;
    ComplexMatrix reference_down;
    double budget_slack = 0.0;
    double coherence_slack = 0.0;
};

/// Real-linear constraint system over a FeasibilityVariable, in isometric
/// real coordinates. When covariance is an entrywise mask the Choi matrix is
/// stored only through its charge blocks, so covariance holds by construction;
/// otherwise the full matrix is stored and the affine projection includes the
/// twirl.
class ConstraintSystem {
public:
    explicit ConstraintSystem(const FeasibilityProblem& p);

    std::size_t variable_dim() const noexcept { return variable_dim_; }
    std::size_t constraint_count() const noexcept { return static_cast<std::size_t>(a_.rows()); }
    std::size_t rank() const noexcept { return static_cast<std::size_t>(singular_.size()); }
    std::size_t channel_dim() const noexcept { return channel_dim_; }
    std::size_t reference_dim() const noexcept { return reference_dim_; }
    bool has_reference_slack() const noexcept { return up_.size > 0; }
    bool has_coherence_slack() const noexcept { return coherence_.size > 0; }
    bool blockwise() const noexcept { return blockwise_; }

    /// Index sets of the Choi matrix that covariance never couples.
    std::vector<std::vector<Eigen::Index>> choi_blocks() const;

    /// Coordinates of v; in blockwise storage entries outside the charge
    /// blocks are dropped (equivalently, v.choi is twirled).
    Eigen::VectorXd pack(const FeasibilityVariable& v) const;
    FeasibilityVariable unpack(const Eigen::VectorXd& x) const;

    /// Orthogonal projection onto {covariant J, A x = b}.
    Eigen::VectorXd project_affine(const Eigen::VectorXd& x) const;
    /// Orthogonal projection onto the product of PSD cones.
    Eigen::VectorXd project_psd(const Eigen::VectorXd& x) const;

    /// Eigen-data of a PSD projection, enough to apply one element of its
    /// generalized Jacobian.
    struct PsdLinearization {
        struct Block {
            std::size_t offset = 0;
            std::size_t size = 0;
            ComplexMatrix vectors;
            Eigen::MatrixXd weights;
        };
        std::vector<Block> blocks;
    };
    Eigen::VectorXd project_psd(const Eigen::VectorXd& x, PsdLinearization& lin) const;
    Eigen::VectorXd apply_psd_derivative(const PsdLinearization& lin, const Eigen::VectorXd& h) const;

    /// Orthogonal projection onto the direction space of the affine set.
    Eigen::VectorXd project_direction(const Eigen::VectorXd& v) const;

    /// Euclidean norm of A x - b.
    double constraint_residual(const Eigen::VectorXd& x) const;
    /// Norm of A x* - b for the least-squares point; positive means the
    /// linear constraints alone are inconsistent.
    double inconsistency() const noexcept { return inconsistency_; }

private:
    struct Segment {
        std::size_t offset = 0;
        std::size_t size = 0;
        std::vector<Eigen::Index> indices;  // Choi rows/cols covered (Choi segments only)
    };

    void write_block(const ComplexMatrix& m, const Segment& seg, Eigen::VectorXd& x) const;
    ComplexMatrix read_block(const Eigen::VectorXd& x, const Segment& seg) const;
    Eigen::VectorXd choi_coordinates(const ComplexMatrix& f) const;

    std::size_t variable_dim_ = 0;
    std::size_t channel_dim_ = 0;
    std::size_t reference_dim_ = 0;
    bool blockwise_ = false;
    CovarianceProjector cov_;
    std::vector<Segment> choi_;
    Segment up_, down_, budget_, coherence_;
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd left_;
    Eigen::MatrixXd right_;
    Eigen::VectorXd singular_;
    double inconsistency_ = 0.0;
};

/// Same as ConstraintSystem(p); the name mirrors the solver pipeline.
ConstraintSystem assemble_constraints(const FeasibilityProblem& p);

/// Nearest PSD matrix in Frobenius norm.
ComplexMatrix project_psd(const ComplexMatrix& m);

/// Real isometric coordinates of a Hermitian matrix: diagonal entries,
/// sqrt(2) Re and sqrt(2) Im of the strict upper triangle.
Eigen::VectorXd hermitian_to_real(const ComplexMatrix& m);
ComplexMatrix real_to_hermitian(const Eigen::Ref<const Eigen::VectorXd>& v, std::size_t n);

FeasibilityReport dykstra_feasibility(const FeasibilityProblem& p);

struct ScanPoint {
    double slack = 0.0;
    /// Largest coherence verified Feasible.
    double best = 0.0;
    /// Smallest coherence not verified Feasible (infeasible or undecided).
    double upper = 1.0;
    std::size_t undecided = 0;
    std::size_t solves = 0;
};

struct ScanOptions {
    std::size_t rounds = 12;
    double lower = 0.0;
    double upper = 1.0;
};

/// Bisection on the coherence target for each reference slack. The problem's
/// target must be a CoherenceTarget; its value is overwritten.
std::vector<ScanPoint> max_coherence_scan(const FeasibilityProblem& p, const std::vector<double>& slacks,
                                          const ScanOptions& options = {});

}  // namespace asym
