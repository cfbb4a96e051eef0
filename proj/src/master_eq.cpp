#include "qbath/master_eq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qbath/errors.hpp"
#include "qbath/observables.hpp"

namespace qbath {

namespace {

Eigen::Index row_index(const PropagatorCoefficients& p, std::size_t i) {
    if (i >= p.size()) throw ParameterError("master-eq: grid index " + std::to_string(i) + " out of range");
    return static_cast<Eigen::Index>(i);
}

// Drift part (xi^* eta + zeta eta^*) X_eta + (xi eta^* + zeta^* eta) X_eta_bar.
cplx drift(const XiZeta& g, cplx eta, cplx x_eta, cplx x_eta_bar) {
    const cplx eta_bar = std::conj(eta);
    return (std::conj(g.xi) * eta + g.zeta * eta_bar) * x_eta + (g.xi * eta_bar + std::conj(g.zeta) * eta) * x_eta_bar;
}

GeneratorCoefficients assemble(const XiZeta& g, const GaussianFJet& f) {
    const GaussianFParams& v = f.value;
    GeneratorCoefficients out;
    out.xi = g.xi;
    out.zeta = g.zeta;
    out.denom = g.denom;
    out.valid = true;
    out.kappa = v.alpha * (g.xi + std::conj(g.xi)) - 2.0 * (g.zeta * std::conj(v.gamma) + std::conj(g.zeta) * v.gamma) -
                f.d_alpha;
    out.mu = g.zeta * v.alpha - 2.0 * g.xi * v.gamma + f.d_gamma;
    out.sigma = g.zeta * std::conj(v.delta) - g.xi * v.delta + f.d_delta;
    return out;
}

}  // namespace

XiZeta xi_zeta(const PropagatorCoefficients& p, std::size_t i, double denom_floor) {
    const Eigen::Index r = row_index(p, i);
    const cplx a = p.A(r), c = p.C(r), da = p.dA(r), dc = p.dC(r);
    XiZeta out;
    out.denom = std::norm(a) - std::norm(c);
    if (!(out.denom > denom_floor)) {
        throw SingularGeneratorError("master-eq: |A|^2 - |C|^2 = " + std::to_string(out.denom) +
                                         " below floor at index " + std::to_string(i),
                                     i, out.denom);
    }
    out.xi = (std::conj(a) * da - std::conj(c) * dc) / out.denom;
    out.zeta = (c * da - a * dc) / out.denom;
    return out;
}

GeneratorCoefficients gaussian_generator(const PropagatorCoefficients& p, std::size_t i, const GaussianFJet& f,
                                         double denom_floor) {
    return assemble(xi_zeta(p, i, denom_floor), f);
}

GeneratorCoefficients try_gaussian_generator(const PropagatorCoefficients& p, std::size_t i, const GaussianFJet& f,
                                             double denom_floor) {
    try {
        return gaussian_generator(p, i, f, denom_floor);
    } catch (const SingularGeneratorError& e) {
        GeneratorCoefficients out;
        out.denom = e.denom;
        out.valid = false;
        return out;
    }
}

ResidualReport generator_residual(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                                  const OscillatorState& s, const std::vector<cplx>& eta_grid, double denom_floor) {
    if (!is_gaussian(s)) throw ParameterError("generator_residual: needs a Gaussian oscillator state");
    const auto f = gaussian_F_jet(p, i, bath);
    if (!f) throw ParameterError("generator_residual: needs a Gaussian bath (equilibrium or coherent)");
    const GeneratorCoefficients g = gaussian_generator(p, i, *f, denom_floor);
    const XiZeta xz{g.xi, g.zeta, g.denom};

    ResidualReport report;
    report.nodes = eta_grid.size();
    double worst = 0.0;
    double scale = 0.0;
    for (const cplx eta : eta_grid) {
        const ChiJet chi = chi_jet(p, i, bath, s, eta);
        const cplx eta_bar = std::conj(eta);
        const cplx local = g.kappa * std::norm(eta) + std::conj(g.mu) * eta * eta + g.mu * eta_bar * eta_bar +
                           std::conj(g.sigma) * eta - g.sigma * eta_bar;
        const cplx rhs = drift(xz, eta, chi.d_eta, chi.d_eta_bar) + local * chi.value;
        worst = std::max(worst, std::abs(chi.d_t - rhs));
        scale = std::max(scale, std::abs(chi.value));
    }
    report.max_residual = scale > 0.0 ? worst / scale : worst;
    return report;
}

ResidualReport generator_residual(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                                  const OscillatorState& s) {
    return generator_residual(p, i, bath, s, eta_test_grid(), default_denom_floor);
}

GeneratorField general_generator_apply(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                                       const OscillatorState& s, const std::vector<cplx>& eta_grid,
                                       double denom_floor) {
    const XiZeta xz = xi_zeta(p, i, denom_floor);
    GeneratorField field;
    field.rhs.resize(eta_grid.size());
    field.flagged.assign(eta_grid.size(), false);
    for (std::size_t k = 0; k < eta_grid.size(); ++k) {
        const ChiJet chi = chi_jet(p, i, bath, s, eta_grid[k]);
        if (chi.bath.flagged) {
            field.flagged[k] = true;
            ++field.flagged_count;
            field.rhs[k] = 0.0;
            continue;
        }
        field.rhs[k] = drift(xz, eta_grid[k], chi.d_eta - chi.value * chi.bath.d_eta,
                             chi.d_eta_bar - chi.value * chi.bath.d_eta_bar) +
                       chi.value * chi.bath.d_t;
    }
    return field;
}

ResidualReport general_residual(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                                const OscillatorState& s, const std::vector<cplx>& eta_grid, double denom_floor) {
    const GeneratorField field = general_generator_apply(p, i, bath, s, eta_grid, denom_floor);
    ResidualReport report;
    report.nodes = eta_grid.size();
    report.flagged_nodes = field.flagged_count;
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < eta_grid.size(); ++k) {
        const ChiJet chi = chi_jet(p, i, bath, s, eta_grid[k]);
        scale = std::max(scale, std::abs(chi.value));
        if (field.flagged[k]) continue;
        worst = std::max(worst, std::abs(chi.d_t - field.rhs[k]));
    }
    report.max_residual = scale > 0.0 ? worst / scale : worst;
    return report;
}

}  // namespace qbath
