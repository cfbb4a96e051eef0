#include "doctest.h"

#include <cmath>
#include <complex>

#include "fock_oracle.hpp"
#include "qbath/errors.hpp"
#include "qbath/oscillator_states.hpp"

using namespace qbath;

namespace {

std::vector<cplx> eta_grid(double extent, int points) {
    std::vector<cplx> out;
    for (int i = 0; i < points; ++i) {
        for (int j = 0; j < points; ++j) {
            const double x = -extent + 2.0 * extent * i / (points - 1);
            const double y = -extent + 2.0 * extent * j / (points - 1);
            out.emplace_back(x, y);
        }
    }
    return out;
}

Eigen::VectorXcd cat_ket(cplx alpha, cplx beta) {
    Eigen::VectorXcd ket = oracle::coherent_ket(alpha) + oracle::coherent_ket(beta);
    return ket / ket.norm();
}

const std::vector<OscillatorState>& sample_states() {
    static const std::vector<OscillatorState> states{
        GaussianMoments{},
        GaussianMoments{cplx(0.5, -1.0), 2.0, cplx(-0.45, -0.8)},
        SqueezedDisplaced{cplx(1.0, 0.5), 0.5, 0.3},
        CatState{2.0, -2.0},
        CatState{cplx(1.0, 1.0), cplx(-0.5, 2.0)},
    };
    return states;
}

}  // namespace

TEST_CASE("vacuum characteristic function") {
    for (const cplx eta : eta_grid(2.0, 7)) {
        CHECK(std::abs(chi0_eval(GaussianMoments{}, eta) - std::exp(-0.5 * std::norm(eta))) < 1e-15);
    }
}

TEST_CASE("normalization, Hermiticity and the modulus bound") {
    for (const auto& s : sample_states()) {
        CHECK(std::abs(chi0_eval(s, 0.0) - 1.0) < 1e-15);
        for (const cplx eta : eta_grid(3.0, 9)) {
            const cplx v = chi0_eval(s, eta);
            CHECK(std::abs(v) <= 1.0 + 1e-12);
            CHECK(std::abs(chi0_eval(s, -eta) - std::conj(v)) < 1e-14);
        }
    }
}

TEST_CASE("cat characteristic function matches a Fock-space trace") {
    const Eigen::VectorXcd ket = cat_ket(2.0, -2.0);
    for (const cplx eta : eta_grid(2.0, 5)) {
        const cplx ref = oracle::expectation(ket, oracle::displacement(eta));
        CHECK(std::abs(chi0_eval(CatState{2.0, -2.0}, eta) - ref) < 1e-10);
    }
}

TEST_CASE("squeezed characteristic function and moments match Fock-space references") {
    const SqueezedDisplaced sq{cplx(0.7, -0.4), 0.5, 0.6};
    const Eigen::VectorXcd ket = oracle::squeezed_ket(sq.disp, sq.r, sq.phi);
    const Eigen::MatrixXcd a = oracle::annihilation();
    const InitialMoments m = initial_moments(sq);
    CHECK(std::abs(m.mean_a - oracle::expectation(ket, a)) < 1e-10);
    CHECK(std::abs(m.n_ex - oracle::expectation(ket, a.adjoint() * a).real()) < 1e-10);
    CHECK(std::abs(m.aa - oracle::expectation(ket, a * a)) < 1e-10);
    for (const cplx eta : eta_grid(1.5, 5)) {
        CHECK(std::abs(chi0_eval(sq, eta) - oracle::expectation(ket, oracle::displacement(eta))) < 1e-10);
    }
}

TEST_CASE("squeezed vacuum photon number is sinh^2 r") {
    for (double r : {0.0, 0.3, 1.0, 2.0}) {
        CHECK(initial_moments(SqueezedDisplaced{0.0, r, 0.4}).n_ex == doctest::Approx(std::sinh(r) * std::sinh(r)));
    }
}

TEST_CASE("cat moments match a Fock-space reference") {
    const CatState cat{cplx(1.0, 1.0), cplx(-0.5, 2.0)};
    const Eigen::VectorXcd ket = cat_ket(cat.alpha, cat.beta);
    const Eigen::MatrixXcd a = oracle::annihilation();
    const InitialMoments m = initial_moments(cat);
    CHECK(std::abs(m.mean_a - oracle::expectation(ket, a)) < 1e-10);
    CHECK(std::abs(m.n_ex - oracle::expectation(ket, a.adjoint() * a).real()) < 1e-10);
    CHECK(std::abs(m.aa - oracle::expectation(ket, a * a)) < 1e-10);
    const Eigen::VectorXcd sum = oracle::coherent_ket(cat.alpha) + oracle::coherent_ket(cat.beta);
    CHECK(cat_normalization(cat) == doctest::Approx(sum.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("degenerate cat reduces to a coherent state") {
    const cplx alpha(1.2, -0.7);
    const InitialMoments m = initial_moments(CatState{alpha, alpha});
    CHECK(std::abs(m.mean_a - alpha) < 1e-14);
    CHECK(m.n_ex == doctest::Approx(std::norm(alpha)));
    CHECK(std::abs(m.aa - alpha * alpha) < 1e-14);
    const InitialMoments vac = initial_moments(GaussianMoments{});
    CHECK(vac.mean_a == cplx{0.0});
    CHECK(vac.n_ex == 0.0);
    CHECK(vac.aa == cplx{0.0});
}

TEST_CASE("chi0 jet derivatives match finite differences") {
    const double h = 1e-6;
    const cplx lambda(0.4, -0.9);
    for (const auto& s : sample_states()) {
        const Chi0Jet jet = chi0_jet(s, lambda);
        const cplx dx = (chi0_eval(s, lambda + h) - chi0_eval(s, lambda - h)) / (2.0 * h);
        const cplx dy = (chi0_eval(s, lambda + cplx(0, h)) - chi0_eval(s, lambda - cplx(0, h))) / (2.0 * h);
        CHECK(std::abs(jet.d_lambda - 0.5 * (dx - cplx(0, 1) * dy)) < 1e-8);
        CHECK(std::abs(jet.d_lambda_bar - 0.5 * (dx + cplx(0, 1) * dy)) < 1e-8);
    }
}

TEST_CASE("unphysical states are rejected") {
    CHECK_THROWS_AS(check_state(GaussianMoments{0.0, -0.2, 0.0}), ParameterError);
    CHECK_THROWS_AS(check_state(GaussianMoments{0.0, 0.0, 0.5}), ParameterError);
    CHECK_THROWS_AS(check_state(SqueezedDisplaced{0.0, -1.0, 0.0}), ParameterError);
    CHECK_NOTHROW(check_state(GaussianMoments{0.0, std::sinh(1.0) * std::sinh(1.0), std::sinh(1.0) * std::cosh(1.0)}));
    CHECK(is_gaussian(SqueezedDisplaced{}));
    CHECK_FALSE(is_gaussian(CatState{1.0, -1.0}));
}
