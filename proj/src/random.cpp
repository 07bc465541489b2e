#include "asym/random.hpp"

#include <cmath>
#include <map>

namespace asym {

Rng trial_rng(std::uint64_t root_seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

ComplexMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < g.cols(); ++c)
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            g(r, c) = Complex(re, im);
        }
    return g;
}

ComplexMatrix random_hermitian(std::size_t d, Rng& rng) {
    const ComplexMatrix g = random_ginibre(d, d, rng);
    return (g + g.adjoint()) / 2.0;
}

ComplexMatrix random_unitary(std::size_t d, Rng& rng) {
    const ComplexMatrix g = random_ginibre(d, d, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR();
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
        const Complex diag = r(k, k);
        const double mag = std::abs(diag);
        if (mag > 0.0) q.col(k) *= diag / mag;
    }
    return q;
}

ComplexVector random_pure_vector(std::size_t d, Rng& rng) {
    ComplexVector v = random_ginibre(d, 1, rng).col(0);
    return v / v.norm();
}

DensityMatrix random_density(std::size_t d, Rng& rng) {
    const ComplexMatrix g = random_ginibre(d, d, rng);
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix::nearest(rho);
}

DensityMatrix random_incoherent(const Hamiltonian& h, Rng& rng) {
    std::exponential_distribution<double> expo(1.0);
    RealVector p(static_cast<Eigen::Index>(h.dim()));
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = expo(rng);
    p /= p.sum();
    const ComplexMatrix rho = h.eigenbasis() * p.cast<Complex>().asDiagonal() * h.eigenbasis().adjoint();
    return DensityMatrix::nearest(rho);
}

ChoiChannel random_channel(std::size_t dim_in, std::size_t dim_out, Rng& rng) {
    const std::size_t n = dim_in * dim_out;
    const ComplexMatrix g = random_ginibre(n, n, rng);
    const ComplexMatrix j0 = g * g.adjoint();
    const std::size_t keep[] = {0};
    const std::size_t dims[] = {dim_in, dim_out};
    const ComplexMatrix x = partial_trace(j0, dims, keep);
    const ComplexMatrix x_inv_sqrt = hermitian_function(eig_hermitian(x), [](double v) { return 1.0 / std::sqrt(v); });
    const ComplexMatrix left = kron(x_inv_sqrt, identity(dim_out));
    ComplexMatrix j = left * j0 * left;
    j = (j + j.adjoint()) / 2.0;
    return ChoiChannel(std::move(j), dim_in, dim_out);
}

ChoiChannel random_covariant_channel(const GroupAction& in, const GroupAction& out, Rng& rng) {
    return twirl_channel(in, out, random_channel(in.dim(), out.dim(), rng));
}

ComplexMatrix random_energy_conserving_unitary(const std::vector<double>& energies, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(energies.size());
    std::vector<std::vector<Eigen::Index>> groups;
    std::vector<double> levels;
    for (Eigen::Index k = 0; k < d; ++k) {
        std::size_t g = 0;
        while (g < levels.size() && std::abs(levels[g] - energies[static_cast<std::size_t>(k)]) > kClusterTol) ++g;
        if (g == levels.size()) {
            levels.push_back(energies[static_cast<std::size_t>(k)]);
            groups.emplace_back();
        }
        groups[g].push_back(k);
    }
    ComplexMatrix u = ComplexMatrix::Zero(d, d);
    for (const auto& idx : groups) {
        const ComplexMatrix block = random_unitary(idx.size(), rng);
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b)
                u(idx[a], idx[b]) = block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    return u;
}

}  // namespace asym
