#pragma once

#include <string>

#include "asym/quantum.hpp"
#include "asym/symmetry.hpp"

namespace asym {

/// Eigenvalue pairs with lambda_j + lambda_k at or below this are skipped.
inline constexpr double kQfiPairCutoff = 1e-12;

/// Quantum Fisher information of the orbit exp(-iHt) rho exp(iHt):
///   2 sum_{jk} (l_j - l_k)^2 / (l_j + l_k) |<j|H|k>|^2.
double qfi(const DensityMatrix& rho, const Hamiltonian& h);
double qfi(const ComplexMatrix& rho, const ComplexMatrix& h);

/// S(rho || twirl(rho)).
double rel_entropy_frameness(const GroupAction& action, const DensityMatrix& rho);

/// tr(rho H) - S(rho) / beta.
double free_energy(const DensityMatrix& rho, const Hamiltonian& h, double beta);

struct CloningChainReport {
    double fisher_r_in = 0.0;
    double fisher_s_in = 0.0;
    double fisher_joint_in = 0.0;
    double fisher_joint_out = 0.0;
    double fisher_r_out = 0.0;
    double fisher_s_out = 0.0;
    /// fisher_joint_in - fisher_joint_out; non-negative for covariant maps.
    double chain_slack = 0.0;
    double covariance_residual = 0.0;
    /// Trace distance between the output R marginal and rho_R.
    double r_marginal_change = 0.0;
    /// Trace norm of joint_out - marginal_r (x) marginal_s.
    double product_defect = 0.0;
    std::string verdict;
};

struct CloningChainOptions {
    double covariance_tol = 1e-8;
    double incoherence_tol = 1e-9;
    double monotone_tol = 1e-8;
    /// Output counts as an exact clone when both the product defect and the
    /// R marginal change are at most this.
    double clone_tol = 1e-6;
    double fisher_zero_tol = 1e-6;
};

/// Evaluates every link of the chain
///   I(rho_R) + I(rho'_S) = I(rho_R (x) rho'_S) <= I(rho_R (x) rho_S) = I(rho_R)
/// on the actual output of `ch` acting on rho_R (x) rho_S. Verdicts:
///   "cloning excluded"  product output with R preserved and I(rho'_S) ~ 0
///   "monotone"          not a clone, joint Fisher information did not grow
///   "violation"         monotonicity or the exclusion failed numerically
/// Throws ValidationError if `ch` is not covariant or rho_S is coherent.
CloningChainReport verify_cloning_chain(const ChoiChannel& ch, const DensityMatrix& rho_r, const Hamiltonian& h_r,
                                        const DensityMatrix& rho_s, const Hamiltonian& h_s,
                                        const CloningChainOptions& options = {});

}  // namespace asym
