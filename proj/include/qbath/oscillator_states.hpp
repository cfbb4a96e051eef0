// oscillator_states.hpp: initial oscillator states through chi(eta, 0) = Tr(rho e^{eta a^dag - eta^* a})

#pragma once

#include <complex>
#include <variant>

#include "qbath/core_model.hpp"

namespace qbath {

// Gaussian state fixed by its first and second moments.
struct GaussianMoments {
    cplx mean_a{};     // <a>
    double n_ex{0.0};  // <a^dag a>
    cplx aa{};         // <a a>
};

// D(disp) S(eps)|0>, eps = r e^{2 i phi}, S(eps) = exp(eps^*/2 a - eps/2 a^dag).
struct SqueezedDisplaced {
    cplx disp{};
    double r{0.0};
    double phi{0.0};
};

// (|alpha> + |beta>)/sqrt(N), N = 2 + 2 Re<alpha|beta>.
struct CatState {
    cplx alpha{};
    cplx beta{};
};

using OscillatorState = std::variant<GaussianMoments, SqueezedDisplaced, CatState>;

struct InitialMoments {
    cplx mean_a{};
    double n_ex{0.0};
    cplx aa{};

    double centered_n() const noexcept { return n_ex - std::norm(mean_a); }
    cplx centered_aa() const noexcept { return aa - mean_a * mean_a; }
};

// Throws ParameterError for unphysical moments or a degenerate cat normalization.
void check_state(const OscillatorState& s);

bool is_gaussian(const OscillatorState& s) noexcept;

// <alpha|beta> for coherent states.
cplx coherent_overlap(cplx alpha, cplx beta) noexcept;
double cat_normalization(const CatState& cat) noexcept;

cplx chi0_eval(const OscillatorState& s, cplx eta);
InitialMoments initial_moments(const OscillatorState& s);

// chi0 and its Wirtinger derivatives with respect to lambda and lambda^*.
struct Chi0Jet {
    cplx value{};
    cplx d_lambda{};
    cplx d_lambda_bar{};
};

Chi0Jet chi0_jet(const OscillatorState& s, cplx lambda);

}  // namespace qbath
