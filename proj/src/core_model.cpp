#include "qbath/core_model.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qbath/errors.hpp"

namespace qbath {

namespace {

bool finite(const cplx& z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Hermitian coefficient matrix without the 1/2, i.e. H/hbar = (1/2) w^dag K w + const.
Eigen::MatrixXcd doubled_form(const ModelSpec& m) {
    const Eigen::Index n = static_cast<Eigen::Index>(m.modes());
    const Eigen::Index h = n + 1;
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(2 * h, 2 * h);
    k(0, 0) = m.nu;
    k(h, h) = m.nu;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index b = j + 1;
        k(b, b) = m.omegas(j);
        k(h + b, h + b) = m.omegas(j);
        // number-conserving block h and its conjugate
        k(0, b) = m.u(j);
        k(b, 0) = std::conj(m.u(j));
        k(h, h + b) = std::conj(m.u(j));
        k(h + b, h) = m.u(j);
        // pairing block g (symmetric) and g^*
        k(0, h + b) = m.v(j);
        k(b, h) = m.v(j);
        k(h, b) = std::conj(m.v(j));
        k(h + b, 0) = std::conj(m.v(j));
    }
    return k;
}

}  // namespace

const char* to_string(CouplingFamily family) noexcept {
    switch (family) {
        case CouplingFamily::RWA: return "rwa";
        case CouplingFamily::PositionPosition: return "position_position";
        case CouplingFamily::Custom: return "custom";
    }
    return "unknown";
}

double spectral_density(const SpectralDiscretization& disc, double omega) {
    switch (disc.family) {
        case SpectralFamily::OhmicExpCutoff:
            return disc.coupling_strength * omega * std::exp(-omega / disc.cutoff);
        case SpectralFamily::FlatBand:
            return disc.coupling_strength;
        case SpectralFamily::Explicit:
            break;
    }
    throw ParameterError("spectral_density: explicit discretization has no density");
}

ModelSpec build_model(const SpectralDiscretization& disc, double nu, CouplingFamily family, Units units) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ParameterError("build_model: nu must be positive");
    if (!(units.hbar > 0.0) || !(units.mass > 0.0)) throw ParameterError("build_model: hbar and mass must be positive");

    ModelSpec m;
    m.nu = nu;
    m.units = units;
    m.coupling_family = family;

    if (disc.family == SpectralFamily::Explicit) {
        const Eigen::Index n = disc.omegas.size();
        if (n < 1) throw ParameterError("build_model: explicit discretization needs at least one mode");
        if (disc.u.size() != n) throw ParameterError("build_model: explicit u has wrong length");
        m.omegas = disc.omegas;
        m.u = disc.u;
        if (disc.v.size() == n) {
            m.v = disc.v;
        } else if (disc.v.size() == 0) {
            if (family == CouplingFamily::PositionPosition) {
                m.v = disc.u;
            } else {
                m.v = Eigen::VectorXcd::Zero(n);
            }
        } else {
            throw ParameterError("build_model: explicit v has wrong length");
        }
        check_model(m);
        return m;
    }

    if (family == CouplingFamily::Custom) {
        throw ParameterError("build_model: custom coupling requires explicit arrays");
    }
    if (disc.n_modes < 1) throw ParameterError("build_model: N must be at least 1");
    if (!(disc.omega_min > 0.0) || !(disc.omega_max > disc.omega_min)) {
        throw ParameterError("build_model: need 0 < omega_min < omega_max");
    }
    if (!(disc.coupling_strength >= 0.0)) throw ParameterError("build_model: coupling strength must be >= 0");
    if (disc.family == SpectralFamily::OhmicExpCutoff && !(disc.cutoff > 0.0)) {
        throw ParameterError("build_model: cutoff must be positive");
    }

    const Eigen::Index n = static_cast<Eigen::Index>(disc.n_modes);
    const double d_omega = (disc.omega_max - disc.omega_min) / static_cast<double>(n);
    m.omegas.resize(n);
    m.u.resize(n);
    m.v.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double omega = disc.omega_min + (static_cast<double>(k) + 0.5) * d_omega;
        const double coupling = std::sqrt(spectral_density(disc, omega) * d_omega);
        m.omegas(k) = omega;
        m.u(k) = coupling;
        m.v(k) = family == CouplingFamily::PositionPosition ? coupling : 0.0;
    }
    check_model(m);
    return m;
}

void check_model(const ModelSpec& m) {
    const Eigen::Index n = m.omegas.size();
    if (n < 1) throw ParameterError("model: N must be at least 1");
    if (m.u.size() != n || m.v.size() != n) throw DataError("model: coupling arrays must have length N");
    if (!std::isfinite(m.nu) || !(m.nu > 0.0)) throw DataError("model: nu must be finite and positive");
    if (!(m.units.hbar > 0.0) || !(m.units.mass > 0.0)) throw ParameterError("model: hbar and mass must be positive");
    for (Eigen::Index k = 0; k < n; ++k) {
        if (!std::isfinite(m.omegas(k)) || !finite(m.u(k)) || !finite(m.v(k))) {
            throw DataError("model: non-finite entry at mode " + std::to_string(k));
        }
        if (!(m.omegas(k) > 0.0)) throw ParameterError("model: bath frequencies must be positive");
    }
    switch (m.coupling_family) {
        case CouplingFamily::RWA:
            if (m.v.cwiseAbs().maxCoeff() != 0.0) throw ParameterError("model: RWA family requires v = 0");
            break;
        case CouplingFamily::PositionPosition:
            for (Eigen::Index k = 0; k < n; ++k) {
                if (m.u(k) != m.v(k) || m.u(k).imag() != 0.0) {
                    throw ParameterError("model: position-position family requires u = v real");
                }
            }
            break;
        case CouplingFamily::Custom:
            break;
    }
}

Eigen::MatrixXcd quadratic_form(const ModelSpec& m) {
    check_model(m);
    return 0.5 * doubled_form(m);
}

double validate_model(const ModelSpec& m) {
    const Eigen::MatrixXcd q = quadratic_form(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(q, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("validate_model: eigensolver failed");
    return solver.eigenvalues().minCoeff();
}

Eigen::MatrixXcd dynamical_matrix(const ModelSpec& m) {
    check_model(m);
    Eigen::MatrixXcd k = doubled_form(m);
    const Eigen::Index h = static_cast<Eigen::Index>(m.modes()) + 1;
    // M = -i Sigma K with Sigma = diag(+1 (annihilators), -1 (creators))
    k.topRows(h) *= cplx(0.0, -1.0);
    k.bottomRows(h) *= cplx(0.0, 1.0);
    return k;
}

}  // namespace qbath
