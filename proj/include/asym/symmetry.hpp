#pragma once

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "asym/quantum.hpp"

namespace asym {

/// U_t = exp(-i H t). The spectrum must be integer so the period is 2*pi.
struct TimeTranslation {
    Hamiltonian hamiltonian;
};

/// Z_order generated by a single unitary with generator^order = 1.
struct FiniteCyclic {
    std::size_t order = 0;
    ComplexMatrix generator;
};

/// S_n represented by one unitary per permutation. Elements are enumerated in
/// lexicographic order of their images; elements[k][i] = pi_k(i).
struct PermutationRep {
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> elements;
    std::vector<ComplexMatrix> unitaries;
};

/// A time parameter for TimeTranslation or an element index for finite groups.
using GroupElement = std::variant<double, std::size_t>;

class GroupAction {
public:
    using Variant = std::variant<TimeTranslation, FiniteCyclic, PermutationRep>;

    static GroupAction time_translation(Hamiltonian h);
    static GroupAction finite_cyclic(std::size_t order, ComplexMatrix generator);
    /// Z_order embedded in the time translations of `h`: generator exp(-2 pi i H / order).
    static GroupAction cyclic_phases(std::size_t order, const Hamiltonian& h);
    /// Defining representation U_pi |i> = |pi(i)> on C^n.
    static GroupAction permutation(std::size_t n);
    /// Arbitrary unitary representation indexed like permutation(n). Spot-checks
    /// the homomorphism property.
    static GroupAction permutation(std::size_t n, std::vector<ComplexMatrix> unitaries);

    const Variant& variant() const noexcept { return v_; }
    std::size_t dim() const noexcept { return dim_; }
    bool is_finite() const noexcept { return !std::holds_alternative<TimeTranslation>(v_); }
    /// Number of group elements; zero for TimeTranslation.
    std::size_t order() const noexcept;
    const char* tag() const noexcept;

    ComplexMatrix unitary(const GroupElement& g) const;

    /// All elements for finite groups, otherwise `grid` equally spaced times on [0, 2 pi).
    std::vector<GroupElement> sample_elements(std::size_t grid = 16) const;

private:
    explicit GroupAction(Variant v);
    Variant v_;
    std::size_t dim_ = 0;
};

/// Joint action g -> U_g^a (x) U_g^b of the same group on a tensor product.
GroupAction tensor(const GroupAction& a, const GroupAction& b);

/// Partition of matrix-entry index pairs by Bohr frequency, computed in the
/// eigenbasis of the Hamiltonian(s).
struct BohrModeIndex {
    std::vector<double> frequencies;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> members;
};

/// Entries (i,j) of a state, frequency E_i - E_j.
BohrModeIndex bohr_modes(const Hamiltonian& h);
/// Entries ((i,a),(j,b)) of a Choi matrix, frequency (E_a - E_i) - (E_b - E_j).
BohrModeIndex bohr_modes(const Hamiltonian& in, const Hamiltonian& out);

DensityMatrix orbit_state(const GroupAction& action, const DensityMatrix& rho, const GroupElement& g);

/// Group average of U_g rho U_g^dagger; for TimeTranslation exactly the
/// dephasing across distinct-energy eigenspaces.
DensityMatrix twirl_state(const GroupAction& action, const DensityMatrix& rho);
ComplexMatrix twirl_operator(const GroupAction& action, const ComplexMatrix& x);

/// Orthogonal (Hilbert-Schmidt) projection of a Choi matrix onto the
/// covariant subspace. Works on arbitrary Hermitian matrices, not only CPTP ones.
ComplexMatrix twirl_choi(const GroupAction& in, const GroupAction& out, const ComplexMatrix& choi);

/// Precomputed form of twirl_choi for repeated use. Diagonal representations
/// (time translations, phase generators) reduce to an entrywise multiplier,
/// possibly after a fixed basis change; other groups fall back to averaging.
class CovarianceProjector {
public:
    CovarianceProjector(const GroupAction& in, const GroupAction& out);

    ComplexMatrix apply(const ComplexMatrix& choi) const;
    std::size_t dim() const noexcept { return dim_; }
    /// True when the projection is an entrywise 0/1 mask in the computational
    /// basis; the kept entries then form blocks of equal charge.
    bool is_mask() const noexcept { return conjugations_.empty() && !rotated_; }
    /// Entrywise multiplier; meaningful only when conjugation is not needed.
    const ComplexMatrix& factor() const noexcept { return factor_; }

private:
    std::size_t dim_ = 0;
    ComplexMatrix factor_;
    ComplexMatrix basis_;
    bool rotated_ = false;
    std::vector<ComplexMatrix> conjugations_;
};

ChoiChannel twirl_channel(const GroupAction& in, const GroupAction& out, const ChoiChannel& ch);
inline ChoiChannel twirl_channel(const GroupAction& action, const ChoiChannel& ch) {
    return twirl_channel(action, action, ch);
}

/// Residual is max_g ||W_g J W_g^dagger - J||_F for finite groups and the
/// mode-dephasing distance ||J - twirl(J)||_F for time translations.
PredicateResult is_covariant(const ChoiChannel& ch, const GroupAction& in, const GroupAction& out, double tol);
inline PredicateResult is_covariant(const ChoiChannel& ch, const GroupAction& action, double tol) {
    return is_covariant(ch, action, action, tol);
}

/// Whether U_g rho U_g^dagger = rho for all g, as ||rho - twirl(rho)||_F.
PredicateResult is_symmetric(const GroupAction& action, const ComplexMatrix& rho, double tol);

}  // namespace asym
