#include "qbath/oscillator_states.hpp"

#include <array>
#include <cmath>

#include "qbath/errors.hpp"

namespace qbath {

namespace {

constexpr double physicality_tol = 1e-12;

InitialMoments squeezed_moments(const SqueezedDisplaced& s) {
    InitialMoments m;
    const double sh = std::sinh(s.r);
    m.mean_a = s.disp;
    m.n_ex = std::norm(s.disp) + sh * sh;
    m.aa = s.disp * s.disp - std::polar(1.0, 2.0 * s.phi) * sh * std::cosh(s.r);
    return m;
}

Chi0Jet gaussian_jet(const InitialMoments& m, cplx lambda) {
    const cplx lambda_bar = std::conj(lambda);
    const double width = m.centered_n() + 0.5;
    const cplx s = m.centered_aa();
    Chi0Jet jet;
    jet.value = std::exp(lambda * std::conj(m.mean_a) - lambda_bar * m.mean_a - width * std::norm(lambda) +
                         0.5 * std::conj(s) * lambda * lambda + 0.5 * s * lambda_bar * lambda_bar);
    jet.d_lambda = jet.value * (std::conj(m.mean_a) - width * lambda_bar + std::conj(s) * lambda);
    jet.d_lambda_bar = jet.value * (-m.mean_a - width * lambda + s * lambda_bar);
    return jet;
}

// <x_j| D(lambda) |x_i> = <x_j|x_i> exp(lambda x_j^* - lambda^* x_i - |lambda|^2 / 2)
Chi0Jet cat_jet(const CatState& cat, cplx lambda) {
    const std::array<cplx, 2> x{cat.alpha, cat.beta};
    const double norm = cat_normalization(cat);
    const cplx lambda_bar = std::conj(lambda);
    Chi0Jet jet;
    for (const cplx& xj : x) {
        for (const cplx& xi : x) {
            const cplx term = coherent_overlap(xj, xi) *
                              std::exp(lambda * std::conj(xj) - lambda_bar * xi - 0.5 * std::norm(lambda));
            jet.value += term;
            jet.d_lambda += term * (std::conj(xj) - 0.5 * lambda_bar);
            jet.d_lambda_bar += term * (-xi - 0.5 * lambda);
        }
    }
    jet.value /= norm;
    jet.d_lambda /= norm;
    jet.d_lambda_bar /= norm;
    return jet;
}

}  // namespace

cplx coherent_overlap(cplx alpha, cplx beta) noexcept {
    return std::exp(-0.5 * std::norm(alpha) - 0.5 * std::norm(beta) + std::conj(alpha) * beta);
}

double cat_normalization(const CatState& cat) noexcept {
    return 2.0 + 2.0 * coherent_overlap(cat.alpha, cat.beta).real();
}

bool is_gaussian(const OscillatorState& s) noexcept { return !std::holds_alternative<CatState>(s); }

void check_state(const OscillatorState& s) {
    if (const auto* g = std::get_if<GaussianMoments>(&s)) {
        const InitialMoments m{g->mean_a, g->n_ex, g->aa};
        if (!std::isfinite(g->n_ex) || !std::isfinite(std::abs(g->mean_a)) || !std::isfinite(std::abs(g->aa))) {
            throw ParameterError("oscillator: non-finite moments");
        }
        const double width = m.centered_n() + 0.5;
        if (m.centered_n() < -physicality_tol || width * width < 0.25 + std::norm(m.centered_aa()) - physicality_tol) {
            throw ParameterError("oscillator: Gaussian moments violate the uncertainty bound");
        }
    } else if (const auto* sq = std::get_if<SqueezedDisplaced>(&s)) {
        if (!(sq->r >= 0.0) || !std::isfinite(sq->r) || !std::isfinite(sq->phi)) {
            throw ParameterError("oscillator: squeezing r must be finite and >= 0");
        }
    } else if (const auto* cat = std::get_if<CatState>(&s)) {
        if (!(cat_normalization(*cat) > 1e-300)) throw ParameterError("oscillator: cat normalization vanishes");
    }
}

InitialMoments initial_moments(const OscillatorState& s) {
    check_state(s);
    if (const auto* g = std::get_if<GaussianMoments>(&s)) return {g->mean_a, g->n_ex, g->aa};
    if (const auto* sq = std::get_if<SqueezedDisplaced>(&s)) return squeezed_moments(*sq);

    const auto& cat = std::get<CatState>(s);
    const std::array<cplx, 2> x{cat.alpha, cat.beta};
    const double norm = cat_normalization(cat);
    cplx mean{}, n_ex{}, aa{};
    for (const cplx& xj : x) {
        for (const cplx& xi : x) {
            const cplx o = coherent_overlap(xj, xi);
            mean += xi * o;
            n_ex += std::conj(xj) * xi * o;
            aa += xi * xi * o;
        }
    }
    return {mean / norm, n_ex.real() / norm, aa / norm};
}

Chi0Jet chi0_jet(const OscillatorState& s, cplx lambda) {
    if (const auto* cat = std::get_if<CatState>(&s)) {
        check_state(s);
        return cat_jet(*cat, lambda);
    }
    return gaussian_jet(initial_moments(s), lambda);
}

cplx chi0_eval(const OscillatorState& s, cplx eta) { return chi0_jet(s, eta).value; }

}  // namespace qbath
