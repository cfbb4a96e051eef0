#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "qbath/errors.hpp"
#include "qbath/master_eq.hpp"
#include "qbath/observables.hpp"
#include "qbath/stock_models.hpp"
#include "stats.hpp"

using namespace qbath;

namespace {

const cplx I{0.0, 1.0};

// Gaussian-F right-hand side written out from the coefficients.
cplx gaussian_rhs(const GeneratorCoefficients& g, const ChiJet& chi, cplx eta) {
    const cplx eb = std::conj(eta);
    const cplx drift = (std::conj(g.xi) * eta + g.zeta * eb) * chi.d_eta + (g.xi * eb + std::conj(g.zeta) * eta) * chi.d_eta_bar;
    const cplx local = g.kappa * std::norm(eta) + std::conj(g.mu) * eta * eta + g.mu * eb * eb +
                       std::conj(g.sigma) * eta - g.sigma * eb;
    return drift + local * chi.value;
}

Eigen::VectorXcd sample_amps(std::size_t n) {
    return sample_coherent_state(0.5, stock::ohmic(n, CouplingFamily::PositionPosition), 2024).amps;
}

}  // namespace

TEST_CASE("decoupled oscillator has a pure rotation generator") {
    const auto p = compute_propagator(stock::decoupled(), TimeGrid::uniform(10.0, 20));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const XiZeta xz = xi_zeta(p, i);
        CHECK(std::abs(xz.xi + I) < 1e-13);
        CHECK(xz.zeta == cplx{0.0});
        CHECK(generator_residual(p, i, Equilibrium{zero_temperature}, GaussianMoments{}).max_residual < 1e-12);
    }
}

TEST_CASE("RWA coupling has no zeta") {
    const auto p = compute_propagator(stock::ohmic(32, CouplingFamily::RWA), TimeGrid::uniform(8.0, 16));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const GeneratorCoefficients g = gaussian_generator(p, i, equilibrium_F_jet(p, i, 0.5));
        CHECK(g.zeta == cplx{0.0});
    }
}

TEST_CASE("resonant RWA generator follows the tangent law and turns singular") {
    const double nu = 1.0, u = 0.5;
    const double t_half = std::numbers::pi / (2.0 * u);
    const auto p = compute_propagator(stock::resonant_rwa(nu, u), TimeGrid::uniform(2.0 * t_half, 40));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double t = p.grid.t[i];
        if (i == 20) {
            CHECK(t == doctest::Approx(t_half));
            CHECK_THROWS_AS(xi_zeta(p, i), SingularGeneratorError);
            const GeneratorCoefficients g = try_gaussian_generator(p, i, equilibrium_F_jet(p, i, 1.0));
            CHECK_FALSE(g.valid);
            CHECK(g.xi == cplx{0.0});
            continue;
        }
        const XiZeta xz = xi_zeta(p, i);
        CHECK(std::abs(xz.xi - (-I * nu - u * std::tan(u * t))) < 1e-9 * (1.0 + std::abs(std::tan(u * t))));
    }
    try {
        xi_zeta(p, 20);
    } catch (const SingularGeneratorError& e) {
        CHECK(e.index == 20);
        CHECK(e.denom < default_denom_floor);
    }
}

TEST_CASE("equilibrium generator coefficients") {
    const auto p = compute_propagator(stock::ohmic(64, CouplingFamily::PositionPosition), TimeGrid::uniform(10.0, 40), 4);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const GeneratorCoefficients g = gaussian_generator(p, i, equilibrium_F_jet(p, i, 0.5));
        CHECK(g.valid);
        CHECK(g.sigma == cplx{0.0});
        CHECK(std::abs(g.kappa.imag()) < 1e-10);
    }
}

TEST_CASE("coefficients at the initial time reduce to parameter derivatives") {
    const auto p = compute_propagator(stock::flat_custom(16), TimeGrid::uniform(1.0, 2));
    const Eigen::VectorXcd amps = Eigen::VectorXcd::Constant(16, cplx(0.5, -0.2));
    for (const BathSpec& bath : {BathSpec{Equilibrium{0.4}}, BathSpec{CoherentState{amps}}}) {
        const GaussianFJet f = *gaussian_F_jet(p, 0, bath);
        const GeneratorCoefficients g = gaussian_generator(p, 0, f);
        CHECK(g.kappa == cplx{-f.d_alpha});
        CHECK(g.mu == f.d_gamma);
        CHECK(g.sigma == f.d_delta);
    }
}

TEST_CASE("Gaussian generator reproduces the exact evolution") {
    const auto p = compute_propagator(stock::ohmic(64, CouplingFamily::PositionPosition), TimeGrid::uniform(10.0, 40), 4);
    const OscillatorState squeezed = SqueezedDisplaced{cplx(0.8, -0.3), 0.4, 0.2};
    const CoherentState coherent{sample_amps(64)};
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(generator_residual(p, i, Equilibrium{0.5}, squeezed).max_residual < 1e-8);
        CHECK(generator_residual(p, i, coherent, squeezed).max_residual < 1e-8);
    }
}

TEST_CASE("general equation agrees with the Gaussian form nodewise") {
    const auto p = compute_propagator(stock::flat_custom(24), TimeGrid::uniform(6.0, 6));
    const OscillatorState s = GaussianMoments{cplx(0.2, 0.4), 1.0, cplx(0.1, -0.3)};
    const std::vector<cplx> grid = eta_test_grid();
    const Eigen::VectorXcd amps = Eigen::VectorXcd::Constant(24, cplx(0.3, 0.6));
    for (const BathSpec& bath : {BathSpec{Equilibrium{0.8}}, BathSpec{CoherentState{amps}}}) {
        for (std::size_t i = 1; i < p.size(); ++i) {
            const GeneratorCoefficients g = gaussian_generator(p, i, *gaussian_F_jet(p, i, bath));
            const GeneratorField field = general_generator_apply(p, i, bath, s, grid);
            CHECK(field.flagged_count == 0);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const ChiJet chi = chi_jet(p, i, bath, s, grid[k]);
                CHECK(std::abs(field.rhs[k] - gaussian_rhs(g, chi, grid[k])) < 1e-10);
            }
        }
    }
}

TEST_CASE("general equation holds for number-state baths") {
    SpectralDiscretization disc;
    disc.family = SpectralFamily::Explicit;
    disc.omegas = Eigen::VectorXd::Constant(1, 1.4);
    disc.u = Eigen::VectorXcd::Constant(1, 0.3);
    const ModelSpec model = build_model(disc, 1.0, CouplingFamily::PositionPosition);
    const auto p = compute_propagator(model, TimeGrid::uniform(3.0, 12));
    const std::vector<cplx> grid = eta_test_grid(2.0, 21);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const ResidualReport r = general_residual(p, i, NumberState{{1}}, CatState{1.0, -1.0}, grid);
        CHECK(r.max_residual < 1e-8);
        CHECK(r.nodes == grid.size());
    }

    const auto p64 = compute_propagator(stock::ohmic(64, CouplingFamily::PositionPosition), TimeGrid::uniform(10.0, 20), 4);
    const NumberState ns = sample_number_state(0.5, p64.model, 77);
    for (std::size_t i = 0; i < p64.size(); ++i) {
        CHECK(general_residual(p64, i, ns, GaussianMoments{}, eta_test_grid()).max_residual < 1e-8);
    }
}

TEST_CASE("normalization is conserved and the generator respects Hermiticity") {
    const auto p = compute_propagator(stock::flat_custom(16), TimeGrid::uniform(5.0, 5));
    const std::vector<cplx> grid{0.0, cplx(0.7, -0.2), cplx(-0.7, 0.2), cplx(1.1, 0.9), cplx(-1.1, -0.9)};
    const Eigen::VectorXcd amps = Eigen::VectorXcd::Constant(16, cplx(0.1, 0.2));
    std::vector<std::uint64_t> occ(16, 1);
    const std::vector<BathSpec> baths{Equilibrium{0.5}, CoherentState{amps}, NumberState{occ}};
    for (const BathSpec& bath : baths) {
        for (const OscillatorState& s : {OscillatorState{GaussianMoments{}}, OscillatorState{CatState{1.0, -1.0}}}) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                const GeneratorField f = general_generator_apply(p, i, bath, s, grid);
                CHECK(std::abs(f.rhs[0]) < 1e-15);
                CHECK(std::abs(f.rhs[1] - std::conj(f.rhs[2])) < 1e-12);
                CHECK(std::abs(f.rhs[3] - std::conj(f.rhs[4])) < 1e-12);
                if (const auto jet = gaussian_F_jet(p, i, bath); jet && is_gaussian(s)) {
                    const GeneratorCoefficients g = gaussian_generator(p, i, *jet);
                    CHECK(std::abs(gaussian_rhs(g, chi_jet(p, i, bath, s, 0.0), 0.0)) < 1e-15);
                }
            }
        }
    }
}

TEST_CASE("stochastic drift coefficient has zero mean and the mapped covariance") {
    const ModelSpec model = stock::ohmic(16, CouplingFamily::PositionPosition);
    const auto p = compute_propagator(model, TimeGrid::uniform(4.0, 4));
    const double beta = 0.5;
    const std::size_t i = 2, j = 4;
    const Eigen::VectorXd occ = mean_occupations(model, beta);

    // sigma(t) = sum_k s_k beta_k + r_k beta_k^*
    auto weights = [&](std::size_t idx) {
        const XiZeta xz = xi_zeta(p, idx);
        const Eigen::Index r = static_cast<Eigen::Index>(idx);
        Eigen::VectorXcd s(16), q(16);
        for (Eigen::Index k = 0; k < 16; ++k) {
            s(k) = xz.zeta * std::conj(p.D(r, k)) - xz.xi * p.B(r, k) + p.dB(r, k);
            q(k) = xz.zeta * std::conj(p.B(r, k)) - xz.xi * p.D(r, k) + p.dD(r, k);
        }
        return std::make_pair(s, q);
    };
    const auto [si, qi] = weights(i);
    const auto [sj, qj] = weights(j);
    cplx expected{};
    for (Eigen::Index k = 0; k < 16; ++k) expected += occ(k) * (si(k) * std::conj(sj(k)) + qi(k) * std::conj(qj(k)));

    oracle::ComplexRunningMean mean, cov;
    for (std::uint64_t n = 0; n < 10000; ++n) {
        const Eigen::VectorXcd amps = sample_coherent_state(beta, model, member_seed(31, n)).amps;
        const cplx sig_i = gaussian_generator(p, i, coherent_F_jet(p, i, amps)).sigma;
        const cplx sig_j = gaussian_generator(p, j, coherent_F_jet(p, j, amps)).sigma;
        mean.add(sig_i);
        cov.add(sig_i * std::conj(sig_j));
    }
    CHECK(mean.within(0.0));
    CHECK(cov.within(expected));
}
