#include "qbath/stock_models.hpp"

#include <cmath>
#include <numbers>

namespace qbath::stock {

ModelSpec decoupled() {
    SpectralDiscretization disc;
    disc.family = SpectralFamily::Explicit;
    disc.omegas = Eigen::VectorXd::Constant(1, 2.0);
    disc.u = Eigen::VectorXcd::Zero(1);
    return build_model(disc, 1.0, CouplingFamily::RWA);
}

ModelSpec resonant_rwa(double nu, double u) {
    SpectralDiscretization disc;
    disc.family = SpectralFamily::Explicit;
    disc.omegas = Eigen::VectorXd::Constant(1, nu);
    disc.u = Eigen::VectorXcd::Constant(1, u);
    return build_model(disc, nu, CouplingFamily::RWA);
}

SpectralDiscretization ohmic_band(std::size_t n_modes) {
    SpectralDiscretization disc;
    disc.family = SpectralFamily::OhmicExpCutoff;
    disc.coupling_strength = ohmic_strength;
    disc.cutoff = ohmic_cutoff;
    disc.omega_min = ohmic_omega_min;
    disc.omega_max = ohmic_omega_max;
    disc.n_modes = n_modes;
    return disc;
}

ModelSpec ohmic(std::size_t n_modes, CouplingFamily family) {
    return build_model(ohmic_band(n_modes), ohmic_nu, family);
}

ModelSpec flat_custom(std::size_t n_modes) {
    SpectralDiscretization flat;
    flat.family = SpectralFamily::FlatBand;
    flat.coupling_strength = 0.02;
    flat.omega_min = 0.5;
    flat.omega_max = 8.0;
    flat.n_modes = n_modes;
    ModelSpec base = build_model(flat, 3.0, CouplingFamily::RWA);

    SpectralDiscretization disc;
    disc.family = SpectralFamily::Explicit;
    disc.omegas = base.omegas;
    disc.u.resize(base.u.size());
    disc.v.resize(base.u.size());
    const cplx counter_phase = std::polar(0.4, std::numbers::pi / 3.0);
    for (Eigen::Index k = 0; k < base.u.size(); ++k) {
        disc.u(k) = base.u(k) * std::polar(1.0, 0.7 * static_cast<double>(k));
        disc.v(k) = base.u(k) * counter_phase;
    }
    return build_model(disc, 3.0, CouplingFamily::Custom);
}

}  // namespace qbath::stock
