// master_eq.hpp: exact evolution equations for the oscillator characteristic function.
//
// General bath:
//   d chi/dt = (xi^* eta + zeta eta^*)(d_eta chi - chi d_eta ln F)
//            + (xi eta^* + zeta^* eta)(d_eta^* chi - chi d_eta^* ln F) + chi d_t ln F
// Gaussian F:
//   d chi/dt = (xi^* eta + zeta eta^*) d_eta chi + (xi eta^* + zeta^* eta) d_eta^* chi
//            + (kappa |eta|^2 + mu^* eta^2 + mu eta^*^2 + sigma^* eta - sigma eta^*) chi

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qbath/bath_states.hpp"
#include "qbath/oscillator_states.hpp"
#include "qbath/propagator.hpp"

namespace qbath {

inline constexpr double default_denom_floor = 1e-8;

struct XiZeta {
    cplx xi{};
    cplx zeta{};
    double denom{0.0};  // |A|^2 - |C|^2
};

// Throws SingularGeneratorError when denom <= denom_floor.
XiZeta xi_zeta(const PropagatorCoefficients& p, std::size_t i, double denom_floor = default_denom_floor);

struct GeneratorCoefficients {
    cplx xi{};
    cplx zeta{};
    cplx kappa{};  // real by construction; stored complex so the imaginary residue is observable
    cplx mu{};
    cplx sigma{};
    double denom{0.0};
    bool valid{false};
};

GeneratorCoefficients gaussian_generator(const PropagatorCoefficients& p, std::size_t i, const GaussianFJet& f,
                                         double denom_floor = default_denom_floor);

// Coefficients flagged invalid (not thrown) where the generator is singular.
GeneratorCoefficients try_gaussian_generator(const PropagatorCoefficients& p, std::size_t i, const GaussianFJet& f,
                                             double denom_floor = default_denom_floor);

struct ResidualReport {
    double max_residual{0.0};      // max |lhs - rhs| / max |chi|
    std::size_t flagged_nodes{0};
    std::size_t nodes{0};
};

// Gaussian-F equation checked against the exact chi on eta_grid.
ResidualReport generator_residual(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                                  const OscillatorState& s, const std::vector<cplx>& eta_grid,
                                  double denom_floor = default_denom_floor);
ResidualReport generator_residual(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                                  const OscillatorState& s);

struct GeneratorField {
    std::vector<cplx> rhs;
    std::vector<bool> flagged;  // Laguerre-zero nodes; rhs is 0 there
    std::size_t flagged_count{0};
};

// Right-hand side of the general equation on eta_grid, for any bath kind.
GeneratorField general_generator_apply(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                                       const OscillatorState& s, const std::vector<cplx>& eta_grid,
                                       double denom_floor = default_denom_floor);

// Residual of general_generator_apply against the exact d chi/dt, excluding flagged nodes.
ResidualReport general_residual(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                                const OscillatorState& s, const std::vector<cplx>& eta_grid,
                                double denom_floor = default_denom_floor);

}  // namespace qbath
