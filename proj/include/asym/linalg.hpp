#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "asym/error.hpp"

namespace asym {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

/// Eigen-decomposition of a Hermitian matrix. `values` are sorted
/// non-increasing and column k of `vectors` belongs to values[k].
struct EigenSystem {
    RealVector values;
    ComplexMatrix vectors;
};

/// Sum of spectral projectors over a cluster of numerically equal eigenvalues.
struct SpectralCluster {
    double value = 0.0;
    ComplexMatrix projector;
    std::size_t multiplicity = 0;
};

struct Norms {
    double frobenius = 0.0;
    double trace_norm = 0.0;
    double operator_norm = 0.0;
};

struct JacobiOptions {
    double off_diagonal_tol = 1e-12;
    int max_sweeps = 100;
};

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kClusterTol = 1e-8;

/// Largest entrywise deviation |M - M^dagger|.
double hermiticity_defect(const ComplexMatrix& m);

/// Largest entrywise deviation |U^dagger U - 1|; infinite for non-square input.
double unitarity_defect(const ComplexMatrix& u);

bool all_finite(const ComplexMatrix& m);

/// Hermitian eigensolver (Householder tridiagonalisation + implicit QL).
/// Throws ValidationError if `h` is not Hermitian within `hermitian_tol`.
EigenSystem eig_hermitian(const ComplexMatrix& h, double hermitian_tol = kHermitianTol);

/// Cyclic complex Jacobi rotations. Slower than eig_hermitian but entirely
/// self-contained; kept as an independent route for cross-checks.
EigenSystem eig_hermitian_jacobi(const ComplexMatrix& h, const JacobiOptions& options = {},
                                 double hermitian_tol = kHermitianTol);

/// Group consecutive eigenvalues closer than `tol` and build their projectors.
/// Downstream code must use these instead of individual eigenvectors whenever
/// degeneracies may occur.
std::vector<SpectralCluster> spectral_clusters(const EigenSystem& es, double tol = kClusterTol);

/// V f(Lambda) V^dagger.
ComplexMatrix hermitian_function(const EigenSystem& es, const std::function<double(double)>& f);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron(std::span<const ComplexMatrix> factors);

ComplexMatrix identity(std::size_t d);

/// Trace out every factor not listed in `keep`. Factor 0 is the leftmost
/// tensor slot; kept factors appear in ascending order.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

/// Reorder tensor factors: output factor k is input factor perm[k].
ComplexMatrix permute_subsystems(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                 std::span<const std::size_t> perm);

Norms norms(const ComplexMatrix& m);
double trace_norm(const ComplexMatrix& m);
double operator_norm(const ComplexMatrix& m);

/// Half the trace norm of the difference.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

std::size_t product(std::span<const std::size_t> dims);

}  // namespace asym
