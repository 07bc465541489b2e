#pragma once

// Small reference implementations used as independent checks in the tests.
// They favour explicit index loops over the library's vectorised routines.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

/// Tr_B of an operator on A (x) B.
inline Matrix trace_second(const Matrix& m, Eigen::Index da, Eigen::Index db) {
    Matrix out = Matrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            for (Eigen::Index k = 0; k < db; ++k) out(i, j) += m(i * db + k, j * db + k);
    return out;
}

/// Tr_A of an operator on A (x) B.
inline Matrix trace_first(const Matrix& m, Eigen::Index da, Eigen::Index db) {
    Matrix out = Matrix::Zero(db, db);
    for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
            for (Eigen::Index k = 0; k < da; ++k) out(i, j) += m(k * db + i, k * db + j);
    return out;
}

/// Kraus action sum_k K rho K^dagger.
inline Matrix kraus_apply(const std::vector<Matrix>& ks, const Matrix& rho) {
    Matrix out = Matrix::Zero(ks.front().rows(), ks.front().rows());
    for (const auto& k : ks) out += k * rho * k.adjoint();
    return out;
}

/// Choi matrix sum_ij |i><j| (x) E(|i><j|) built from Kraus operators.
inline Matrix kraus_choi(const std::vector<Matrix>& ks) {
    const Eigen::Index din = ks.front().cols(), dout = ks.front().rows();
    Matrix choi = Matrix::Zero(din * dout, din * dout);
    for (Eigen::Index i = 0; i < din; ++i)
        for (Eigen::Index j = 0; j < din; ++j) {
            Matrix unit = Matrix::Zero(din, din);
            unit(i, j) = 1.0;
            choi.block(i * dout, j * dout, dout, dout) = kraus_apply(ks, unit);
        }
    return choi;
}

/// exp(-i diag(e) t) as a matrix.
inline Matrix phase(const std::vector<double>& e, double t) {
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(e.size()), static_cast<Eigen::Index>(e.size()));
    for (std::size_t k = 0; k < e.size(); ++k) u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = std::exp(Complex(0, -e[k] * t));
    return u;
}

/// Fisher information of a pure state: 4 Var(H).
inline double pure_state_fisher(const Eigen::VectorXcd& psi, const Matrix& h) {
    const Complex mean = psi.dot(h * psi);
    const Complex second = psi.dot(h * h * psi);
    return 4.0 * (second - mean * mean).real();
}

/// SLD Fisher information from the defining equation rho' = (rho L + L rho)/2,
/// solved entrywise in the eigenbasis of rho, then I = tr(rho' L).
inline double sld_fisher(const Matrix& rho, const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    const Matrix v = es.eigenvectors();
    const Eigen::VectorXd l = es.eigenvalues();
    const Matrix drho = Complex(0, -1) * (h * rho - rho * h);
    const Matrix d = v.adjoint() * drho * v;
    Matrix sld = Matrix::Zero(rho.rows(), rho.cols());
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j)
            if (l(i) + l(j) > 1e-12) sld(i, j) = 2.0 * d(i, j) / (l(i) + l(j));
    return (d * sld).trace().real();
}

/// |<alpha|alpha e^{-it}>| = exp(-|alpha|^2 (1 - cos t)).
inline double coherent_overlap(double alpha, double t) { return std::exp(-alpha * alpha * (1.0 - std::cos(t))); }

}  // namespace oracle
