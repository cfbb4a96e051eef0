// stock_models.hpp: reference models shared by the CLI samples, tests and acceptance suite

#pragma once

#include <cstddef>

#include "qbath/core_model.hpp"

namespace qbath::stock {

// Ohmic band used throughout: J(w) = 0.1 w e^{-w/5} on [0.01, 20], oscillator at nu = 4.
inline constexpr double ohmic_strength = 0.1;
inline constexpr double ohmic_cutoff = 5.0;
inline constexpr double ohmic_omega_min = 0.01;
inline constexpr double ohmic_omega_max = 20.0;
inline constexpr double ohmic_nu = 4.0;

// nu = 1, one bath mode at omega = 2, no coupling.
ModelSpec decoupled();

// N = 1, omega = nu, real coupling u.
ModelSpec resonant_rwa(double nu = 1.0, double u = 0.5);

SpectralDiscretization ohmic_band(std::size_t n_modes);
ModelSpec ohmic(std::size_t n_modes, CouplingFamily family);

// Flat band on [0.5, 8] with complex co-rotating phases and a counter-rotating part.
ModelSpec flat_custom(std::size_t n_modes = 128);

}  // namespace qbath::stock
