// bath_states.hpp: bath preparations and the bath influence factor
//   F(eta, t) = Tr(rho_bath prod_k exp(xi_k b_k^dag - xi_k^* b_k)),  xi_k = eta B_k^* - eta^* D_k
//
// Equilibrium and coherent baths give a Gaussian F,
//   F = exp(delta^* eta - delta eta^* - alpha |eta|^2 + gamma^* eta^2 + gamma eta^*^2),
// number states give a Gaussian times a product of Laguerre polynomials.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qbath/propagator.hpp"

namespace qbath {

// beta sentinel for a zero-temperature bath.
inline constexpr double zero_temperature = std::numeric_limits<double>::infinity();

struct Equilibrium {
    double beta{zero_temperature};
};

struct NumberState {
    std::vector<std::uint64_t> n;
};

struct CoherentState {
    Eigen::VectorXcd amps;
};

using BathSpec = std::variant<Equilibrium, NumberState, CoherentState>;

void check_bath(const BathSpec& bath, std::size_t modes);

struct GaussianFParams {
    cplx delta{};
    double alpha{0.0};
    cplx gamma{};
};

// Parameters of a Gaussian F together with their exact time derivatives.
struct GaussianFJet {
    GaussianFParams value;
    cplx d_delta{};
    double d_alpha{0.0};
    cplx d_gamma{};
};

struct NoiseCorrelation {
    cplx c1{};  // mean of delta(t) delta^*(t')
    cplx c2{};  // mean of delta(t) delta(t')
};

// Bose factor 1/(exp(beta hbar omega) - 1); 0 at zero temperature.
double occupation(double beta, double omega, double hbar = 1.0);
Eigen::VectorXd mean_occupations(const ModelSpec& model, double beta);

cplx gaussian_F_eval(const GaussianFParams& f, cplx eta);

// alpha = sum (|B_k|^2 + |D_k|^2) w_k, gamma = sum B_k D_k w_k for arbitrary weights.
GaussianFJet weighted_F_jet(const PropagatorCoefficients& p, std::size_t i, const Eigen::VectorXd& weights);

GaussianFParams equilibrium_F_params(const PropagatorCoefficients& p, std::size_t i, double beta);
GaussianFJet equilibrium_F_jet(const PropagatorCoefficients& p, std::size_t i, double beta);

// Gaussian-form parameters with n_k + 1/2 weights; they give the exact number-state variances.
GaussianFParams number_equivalent_params(const PropagatorCoefficients& p, std::size_t i,
                                         const std::vector<std::uint64_t>& n);

cplx number_F_eval(const PropagatorCoefficients& p, std::size_t i, const std::vector<std::uint64_t>& n, cplx eta);

GaussianFParams coherent_F_params(const PropagatorCoefficients& p, std::size_t i, const Eigen::VectorXcd& amps);
GaussianFJet coherent_F_jet(const PropagatorCoefficients& p, std::size_t i, const Eigen::VectorXcd& amps);

// Gaussian jet for equilibrium and coherent baths; nullopt for number states.
std::optional<GaussianFJet> gaussian_F_jet(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath);

cplx bath_F_eval(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, cplx eta);

// F together with the Wirtinger and time derivatives of ln F.
struct LogFJet {
    cplx value{1.0};
    cplx d_eta{};
    cplx d_eta_bar{};
    cplx d_t{};
    bool flagged{false};  // node sits on a Laguerre zero; log-derivatives are not usable
};

LogFJet bath_log_F_jet(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, cplx eta);

// Independent seed for ensemble member `index`.
std::uint64_t member_seed(std::uint64_t seed, std::uint64_t index) noexcept;

// n_k ~ geometric with P(n) = (1 - e^{-beta hbar omega_k}) e^{-beta hbar omega_k n}.
NumberState sample_number_state(double beta, const ModelSpec& model, std::uint64_t seed);

// beta_k complex normal, mean 0, E|beta_k|^2 = nbar_k.
CoherentState sample_coherent_state(double beta, const ModelSpec& model, std::uint64_t seed);

NoiseCorrelation delta_correlations(const PropagatorCoefficients& p, std::size_t i, std::size_t j, double beta);

}  // namespace qbath
