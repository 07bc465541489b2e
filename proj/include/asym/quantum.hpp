#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "asym/linalg.hpp"

namespace asym {

/// Trace-one positive semidefinite matrix. Construction validates Hermiticity,
/// positivity and normalisation within `tol`.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix m, double tol = kHermitianTol);

    static DensityMatrix pure(const ComplexVector& psi);
    static DensityMatrix basis(std::size_t dim, std::size_t k);
    static DensityMatrix maximally_mixed(std::size_t dim);
    static DensityMatrix diagonal(std::span<const double> probabilities);

    /// Hermitian part, negative eigenvalues clipped, renormalised. For outputs
    /// of channels that are CPTP only up to solver tolerance.
    static DensityMatrix nearest(const ComplexMatrix& m);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }

    double purity() const;

private:
    ComplexMatrix matrix_;
};

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Hermitian observable with a cached eigenbasis. Energies are listed in the
/// order of the basis columns; for diagonal Hamiltonians the basis is exactly
/// the identity so no eigensolver noise enters downstream mode bookkeeping.
class Hamiltonian {
public:
    explicit Hamiltonian(const ComplexMatrix& m, double tol = kHermitianTol);
    static Hamiltonian diagonal(std::vector<double> energies);
    static Hamiltonian pauli_z();

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<double>& energies() const noexcept { return energies_; }
    const ComplexMatrix& eigenbasis() const noexcept { return basis_; }
    bool integer_spectrum() const noexcept { return integer_spectrum_; }
    bool is_diagonal() const noexcept { return diagonal_; }
    std::size_t dim() const noexcept { return energies_.size(); }

    /// Projectors onto distinct-energy eigenspaces (clustering at kClusterTol).
    std::vector<SpectralCluster> eigenspaces(double tol = kClusterTol) const;

private:
    Hamiltonian() = default;
    void finish();

    ComplexMatrix matrix_;
    std::vector<double> energies_;
    ComplexMatrix basis_;
    bool integer_spectrum_ = false;
    bool diagonal_ = false;
};

/// H_a (x) 1 + 1 (x) H_b, with eigenbasis kron(basis_a, basis_b).
Hamiltonian combined(const Hamiltonian& a, const Hamiltonian& b);

/// A channel stored as its Choi matrix with the input slot first:
///   J = sum_ij |i><j|_in (x) E(|i><j|)_out.
/// Construction validates complete positivity and trace preservation.
class ChoiChannel {
public:
    ChoiChannel(ComplexMatrix choi, std::size_t dim_in, std::size_t dim_out, double tol = 1e-9);

    static ChoiChannel identity(std::size_t d);
    static ChoiChannel from_kraus(std::span<const ComplexMatrix> kraus);
    static ChoiChannel from_unitary(const ComplexMatrix& u);
    /// rho -> tr(rho) I/d
    static ChoiChannel completely_depolarizing(std::size_t d);
    /// rho -> tr(rho) sigma
    static ChoiChannel replacement(const DensityMatrix& sigma, std::size_t dim_in);

    std::size_t dim_in() const noexcept { return dim_in_; }
    std::size_t dim_out() const noexcept { return dim_out_; }
    const ComplexMatrix& choi() const noexcept { return choi_; }

    /// Raw linear action on any dim_in x dim_in operator.
    ComplexMatrix apply(const ComplexMatrix& x) const;

private:
    ComplexMatrix choi_;
    std::size_t dim_in_;
    std::size_t dim_out_;
};

/// Largest eigenvalue violation and trace-preservation defect of a Choi matrix.
struct ChoiDefects {
    double min_eigenvalue = 0.0;
    double trace_preservation = 0.0;
};
ChoiDefects choi_defects(const ComplexMatrix& choi, std::size_t dim_in, std::size_t dim_out);

/// E(X) = sum_ij X_ij J[(i,.),(j,.)] for the input-first convention.
ComplexMatrix apply_choi(const ComplexMatrix& choi, std::size_t dim_in, std::size_t dim_out,
                         const ComplexMatrix& x);

DensityMatrix apply_channel(const ChoiChannel& ch, const DensityMatrix& rho);

/// Choi of the channel on A (x) B acting as a (x) b.
ChoiChannel tensor(const ChoiChannel& a, const ChoiChannel& b);

/// Choi of b o a.
ChoiChannel compose(const ChoiChannel& b, const ChoiChannel& a);

/// E(rho) = Tr_traced[ U (rho (x) ancilla) U^dagger ]. `dims` factorises the
/// dilation space (product must equal dim(rho) * dim(ancilla)); `traced`
/// lists the factors removed after the unitary.
ChoiChannel channel_from_stinespring(const ComplexMatrix& u, const DensityMatrix& ancilla,
                                     std::span<const std::size_t> dims,
                                     std::span<const std::size_t> traced);

struct BipartiteMarginals {
    DensityMatrix joint;
    DensityMatrix marginal_r;
    DensityMatrix marginal_s;
};
BipartiteMarginals marginals(const DensityMatrix& joint, std::size_t dim_r, std::size_t dim_s);

/// Natural-log entropy; eigenvalues below 1e-14 contribute nothing.
double von_neumann_entropy(const DensityMatrix& rho);

/// S(rho || sigma) in nats; +infinity when supp(rho) is not inside supp(sigma).
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

DensityMatrix gibbs_state(const Hamiltonian& h, double beta);

struct PredicateResult {
    bool holds = false;
    double residual = 0.0;
};

/// Trace distance between E(gamma) and gamma.
PredicateResult is_gibbs_preserving(const ChoiChannel& ch, const Hamiltonian& h, double beta, double tol);

/// sum_E P_E X P_E over distinct-energy eigenspaces.
ComplexMatrix dephase(const ComplexMatrix& x, const Hamiltonian& h);

/// ||rho - D_H(rho)||_1; zero exactly when [rho, H] = 0.
double coherence_magnitude(const DensityMatrix& rho, const Hamiltonian& h);

}  // namespace asym
