// core_model.hpp: discretized oscillator + bath Hamiltonian and its dynamical matrix
//
// H/hbar = nu a^dag a + sum_k omega_k b_k^dag b_k
//        + sum_k (u_k a^dag b_k + u_k^* b_k^dag a) + sum_k (v_k a^dag b_k^dag + v_k^* b_k a)
//
// Operator vectors are ordered (a, b_1..b_N, a^dag, b_1^dag..b_N^dag).

#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qbath {

using cplx = std::complex<double>;

struct Units {
    double hbar{1.0};
    double mass{1.0};  // mass of the distinguished oscillator
};

enum class CouplingFamily { RWA, PositionPosition, Custom };

struct ModelSpec {
    double nu{1.0};            // oscillator angular frequency
    Eigen::VectorXd omegas;    // bath frequencies
    Eigen::VectorXcd u;        // co-rotating couplings
    Eigen::VectorXcd v;        // counter-rotating couplings
    Units units;
    CouplingFamily coupling_family{CouplingFamily::Custom};

    std::size_t modes() const noexcept { return static_cast<std::size_t>(omegas.size()); }
    // Dimension of the operator vector, 2N + 2.
    std::size_t dimension() const noexcept { return 2 * modes() + 2; }
};

enum class SpectralFamily { OhmicExpCutoff, FlatBand, Explicit };

struct SpectralDiscretization {
    SpectralFamily family{SpectralFamily::OhmicExpCutoff};
    double coupling_strength{0.0};
    double cutoff{1.0};
    double omega_min{0.01};
    double omega_max{1.0};
    std::size_t n_modes{1};

    // Explicit passthrough; v may be left empty for RWA / PositionPosition.
    Eigen::VectorXd omegas;
    Eigen::VectorXcd u;
    Eigen::VectorXcd v;
};

// J(omega) for the Ohmic and flat families.
double spectral_density(const SpectralDiscretization& disc, double omega);

// Midpoint grid omega_k = omega_min + (k + 1/2) d_omega with |u_k|^2 = J(omega_k) d_omega.
ModelSpec build_model(const SpectralDiscretization& disc, double nu, CouplingFamily family,
                      Units units = {});

// Structural invariants: sizes, positivity of frequencies, finiteness, family constraints.
void check_model(const ModelSpec& m);

// Hermitian Q with H/hbar = w^dag Q w + const, each monomial split evenly between
// its two Hermitian-conjugate placements.
Eigen::MatrixXcd quadratic_form(const ModelSpec& m);

// Smallest eigenvalue of quadratic_form; the model is usable only if it is positive.
double validate_model(const ModelSpec& m);

// dw/dt = M w for the Heisenberg operators w = (a, b, a^dag, b^dag).
Eigen::MatrixXcd dynamical_matrix(const ModelSpec& m);

const char* to_string(CouplingFamily family) noexcept;

}  // namespace qbath
