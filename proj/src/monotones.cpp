#include "asym/monotones.hpp"

#include <cmath>

namespace asym {

double qfi(const ComplexMatrix& rho, const ComplexMatrix& h) {
    if (rho.rows() != h.rows()) throw DimensionError("qfi: state and Hamiltonian differ in dimension");
    const EigenSystem es = eig_hermitian(rho, 1e-9);
    const ComplexMatrix hk = es.vectors.adjoint() * h * es.vectors;
    double acc = 0.0;
    const Eigen::Index d = rho.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) {
            const double s = es.values[j] + es.values[k];
            if (s <= kQfiPairCutoff) continue;
            const double diff = es.values[j] - es.values[k];
            acc += diff * diff / s * std::norm(hk(j, k));
        }
    }
    return 2.0 * acc;
}

double qfi(const DensityMatrix& rho, const Hamiltonian& h) { return qfi(rho.matrix(), h.matrix()); }

double rel_entropy_frameness(const GroupAction& action, const DensityMatrix& rho) {
    return relative_entropy(rho, twirl_state(action, rho));
}

double free_energy(const DensityMatrix& rho, const Hamiltonian& h, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("free_energy: beta must be positive", beta);
    if (rho.dim() != h.dim()) throw DimensionError("free_energy: dimension mismatch");
    const double energy = (rho.matrix() * h.matrix()).trace().real();
    return energy - von_neumann_entropy(rho) / beta;
}

CloningChainReport verify_cloning_chain(const ChoiChannel& ch, const DensityMatrix& rho_r, const Hamiltonian& h_r,
                                        const DensityMatrix& rho_s, const Hamiltonian& h_s,
                                        const CloningChainOptions& options) {
    const std::size_t dr = rho_r.dim();
    const std::size_t ds = rho_s.dim();
    if (h_r.dim() != dr || h_s.dim() != ds) throw DimensionError("verify_cloning_chain: Hamiltonian dimension mismatch");
    if (ch.dim_in() != dr * ds || ch.dim_out() != dr * ds)
        throw DimensionError("verify_cloning_chain: channel must act on R (x) S");

    const Hamiltonian h_joint = combined(h_r, h_s);
    const auto action = GroupAction::time_translation(h_joint);
    CloningChainReport rep;
    rep.covariance_residual = is_covariant(ch, action, options.covariance_tol).residual;
    if (rep.covariance_residual > options.covariance_tol)
        throw ValidationError("verify_cloning_chain: channel is not covariant", rep.covariance_residual);
    const double coh = coherence_magnitude(rho_s, h_s);
    if (coh > options.incoherence_tol) throw ValidationError("verify_cloning_chain: rho_S carries coherence", coh);

    const DensityMatrix joint_in = tensor(rho_r, rho_s);
    const DensityMatrix joint_out = DensityMatrix::nearest(ch.apply(joint_in.matrix()));
    const auto m = marginals(joint_out, dr, ds);

    rep.fisher_r_in = qfi(rho_r, h_r);
    rep.fisher_s_in = qfi(rho_s, h_s);
    rep.fisher_joint_in = qfi(joint_in, h_joint);
    rep.fisher_joint_out = qfi(joint_out, h_joint);
    rep.fisher_r_out = qfi(m.marginal_r, h_r);
    rep.fisher_s_out = qfi(m.marginal_s, h_s);
    rep.chain_slack = rep.fisher_joint_in - rep.fisher_joint_out;
    rep.r_marginal_change = trace_distance(m.marginal_r.matrix(), rho_r.matrix());
    rep.product_defect =
        trace_norm(joint_out.matrix() - kron(m.marginal_r.matrix(), m.marginal_s.matrix()));

    const bool monotone = rep.chain_slack >= -options.monotone_tol;
    const bool clone = rep.product_defect <= options.clone_tol && rep.r_marginal_change <= options.clone_tol;
    if (!monotone || (clone && rep.fisher_s_out > options.fisher_zero_tol))
        rep.verdict = "violation";
    else if (clone)
        rep.verdict = "cloning excluded";
    else
        rep.verdict = "monotone";
    return rep;
}

}  // namespace asym
