#pragma once

#include <cstdint>
#include <random>

#include "asym/quantum.hpp"
#include "asym/symmetry.hpp"

namespace asym {

using Rng = std::mt19937_64;

/// Independent, reproducible generator for trial `index` of stream `stream`
/// under a root seed.
Rng trial_rng(std::uint64_t root_seed, std::uint64_t stream, std::uint64_t index);

ComplexMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng);
ComplexMatrix random_hermitian(std::size_t d, Rng& rng);
/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
ComplexMatrix random_unitary(std::size_t d, Rng& rng);
ComplexVector random_pure_vector(std::size_t d, Rng& rng);
/// Full-rank mixed state from the Ginibre ensemble.
DensityMatrix random_density(std::size_t d, Rng& rng);
/// Diagonal in the Hamiltonian's eigenbasis, with random populations.
DensityMatrix random_incoherent(const Hamiltonian& h, Rng& rng);
/// Random CPTP map from a Ginibre Choi matrix normalised to trace preservation.
ChoiChannel random_channel(std::size_t dim_in, std::size_t dim_out, Rng& rng);
/// Twirl of random_channel.
ChoiChannel random_covariant_channel(const GroupAction& in, const GroupAction& out, Rng& rng);
/// Unitary commuting with diag(energies): a Haar unitary on each eigenspace.
ComplexMatrix random_energy_conserving_unitary(const std::vector<double>& energies, Rng& rng);

}  // namespace asym
