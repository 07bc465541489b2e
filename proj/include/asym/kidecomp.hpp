#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "asym/quantum.hpp"
#include "asym/symmetry.hpp"

namespace asym {

/// Every tolerance of the decomposition pipeline in one place.
struct KiConfig {
    /// Relative norm below which a candidate algebra element counts as already spanned.
    double rank_tol = 1e-9;
    /// Eigenvalue clustering for central and block-internal elements.
    double cluster_tol = 1e-8;
    /// Largest accepted deviation of V^dagger b V from b_J (x) 1_K.
    double block_tol = 1e-7;
    /// Eigenvalues of the averaged state above this define the support.
    double support_cutoff = 1e-10;
    /// Largest accepted ||T(rho) - rho||_F over the family.
    double fixed_tol = 1e-8;
    double spectrum_tol = 1e-7;
    double weight_tol = 1e-8;
    std::uint64_t seed = 0x4b49;
    /// Group points used when a family is sampled from an orbit.
    std::size_t grid = 16;
};

/// Orthonormal (Hilbert-Schmidt) basis of the *-algebra generated by a set
/// of square matrices together with the identity.
struct AlgebraBasis {
    std::vector<ComplexMatrix> generators;
    std::vector<ComplexMatrix> basis;
    std::size_t space_dim = 0;

    std::size_t dim() const noexcept { return basis.size(); }
    /// Largest norm of the component of b_i b_j outside the span.
    double closure_defect() const;
    /// Largest norm of the component of b_i^dagger outside the span.
    double adjoint_defect() const;
};

AlgebraBasis generated_algebra(const std::vector<ComplexMatrix>& matrices, double tol = 1e-9);

/// Smallest *-algebra containing `matrices` that is also invariant under
/// x -> w x w^{-1} and x -> w^{-1} x w for a positive definite weight w.
AlgebraBasis generated_algebra(const std::vector<ComplexMatrix>& matrices, const ComplexMatrix& weight,
                               double tol = 1e-9);

struct KiBlock {
    /// Columns indexed (a, k) with a on J (major) and k on K (minor).
    ComplexMatrix isometry;
    std::size_t dim_j = 0;
    std::size_t dim_k = 0;
    ComplexMatrix omega;
};

struct KIDecomposition {
    std::size_t dim = 0;
    /// Isometry onto the subspace the blocks decompose; identity when the
    /// whole space is used.
    ComplexMatrix support;
    std::vector<KiBlock> blocks;
    /// weights[g][j] and factors[g][j]; empty for a bare algebra.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<ComplexMatrix>> factors;
    /// Worst block-structure defect seen while factorising.
    double structure_residual = 0.0;
    /// Worst ||rho_g - sum_j V_j (q rho_j (x) omega_j) V_j^dagger||_F.
    double reconstruction_residual = 0.0;
    std::string diagnostics;
};

/// Wedderburn block structure of a *-algebra: every element equals
/// sum_j V_j (A_j (x) 1_K) V_j^dagger. Multiplicity states are maximally mixed.
/// Throws ValidationError with the measured residual when the structure cannot
/// be resolved within block_tol.
KIDecomposition decompose_algebra(const AlgebraBasis& algebra, const KiConfig& config = {});

/// Decomposition rho_g = sum_j q_{j|g} V_j (rho_{j|g} (x) omega_j) V_j^dagger of a
/// finite family fixed by `ch`, on the support of the family average. The
/// algebra is generated by the density ratios avg^{-1/2} rho_g avg^{-1/2} and
/// closed under the modular action of the average, so omega_j does not depend on g.
KIDecomposition ki_for_invariant_family(const ChoiChannel& ch, const std::vector<DensityMatrix>& family,
                                        const KiConfig& config = {});

/// Same without a channel to check against.
KIDecomposition ki_for_family(const std::vector<DensityMatrix>& family, const KiConfig& config = {});

/// rho(g) on the action's sample grid (all elements for finite groups).
std::vector<DensityMatrix> orbit_family(const GroupAction& action, const DensityMatrix& rho, std::size_t grid = 16);

/// Worst reconstruction error of `family` in the given decomposition,
/// including weight outside the support and between blocks.
double reconstruction_residual(const std::vector<DensityMatrix>& family, const KIDecomposition& dec);

struct SpectrumReport {
    bool constant = true;
    /// Per block: largest deviation of the sorted compressed spectrum from the first state's.
    std::vector<double> spectrum_deviation;
    /// Per block: largest deviation of the block weight.
    std::vector<double> weight_deviation;
    double max_spectrum_deviation = 0.0;
    double max_weight_deviation = 0.0;
};

SpectrumReport spectrum_constancy_check(const std::vector<DensityMatrix>& family, const KIDecomposition& dec,
                                        const KiConfig& config = {});

}  // namespace asym
