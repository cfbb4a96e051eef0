// fock_oracle.hpp: truncated Fock-space matrices used as independent references.
// Dimension 60 keeps the truncation tail below 1e-12 for coherent amplitudes up to 4
// and squeezing up to r = 0.5.

#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace qbath::oracle {

using cplx = std::complex<double>;

inline constexpr int fock_dim = 60;

inline Eigen::MatrixXcd annihilation(int dim = fock_dim) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// exp(eta a^dag - eta^* a) of the truncated generator.
inline Eigen::MatrixXcd displacement(cplx eta, int dim = fock_dim) {
    const Eigen::MatrixXcd a = annihilation(dim);
    const Eigen::MatrixXcd gen = eta * a.adjoint() - std::conj(eta) * a;
    return gen.exp();
}

inline Eigen::VectorXcd coherent_ket(cplx alpha, int dim = fock_dim) {
    Eigen::VectorXcd ket(dim);
    cplx term = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n < dim; ++n) {
        ket(n) = term;
        term *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return ket;
}

inline Eigen::VectorXcd number_ket(int n, int dim = fock_dim) {
    Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(dim);
    ket(n) = 1.0;
    return ket;
}

// D(disp) S(r e^{2 i phi}) |0>, S(eps) = exp(eps^*/2 a^2 - eps/2 a^dag^2).
inline Eigen::VectorXcd squeezed_ket(cplx disp, double r, double phi, int dim = fock_dim) {
    const Eigen::MatrixXcd a = annihilation(dim);
    const cplx eps = std::polar(r, 2.0 * phi);
    const Eigen::MatrixXcd gen = 0.5 * std::conj(eps) * a * a - 0.5 * eps * a.adjoint() * a.adjoint();
    const Eigen::MatrixXcd s = gen.exp();
    return displacement(disp, dim) * (s * number_ket(0, dim));
}

inline cplx expectation(const Eigen::VectorXcd& ket, const Eigen::MatrixXcd& op) {
    return ket.dot(op * ket) / ket.squaredNorm();
}

}  // namespace qbath::oracle
