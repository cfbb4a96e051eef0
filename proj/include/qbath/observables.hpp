// observables.hpp: reduced-oscillator observables from
//   chi(eta, t) = chi0(eta A^* - eta^* C) F(eta, t)

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "qbath/bath_states.hpp"
#include "qbath/oscillator_states.hpp"
#include "qbath/propagator.hpp"

namespace qbath {

struct MeanXP {
    double x{0.0};
    double p{0.0};
};

struct Variances {
    double x{0.0};
    double p{0.0};
};

struct Moments {
    double mean_x{0.0};
    double mean_p{0.0};
    double var_x{0.0};
    double var_p{0.0};
    double purity{1.0};
};

cplx chi_eval(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s,
              cplx eta);

// chi with its Wirtinger derivatives and exact time derivative.
struct ChiJet {
    cplx value{};
    cplx d_eta{};
    cplx d_eta_bar{};
    cplx d_t{};
    LogFJet bath;  // ln F derivatives used to build the jet
};

ChiJet chi_jet(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s,
               cplx eta);

MeanXP mean_xp(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s);
Variances variances(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s);

// chi = exp(eta mean^* - eta^* mean - a |eta|^2 + g^* eta^2 + g eta^*^2) when both factors are Gaussian.
struct TotalGaussian {
    cplx mean{};
    double a{0.0};
    cplx g{};
};

TotalGaussian total_gaussian(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                             const OscillatorState& s);

// 1 / (2 sqrt(a^2 - 4|g|^2)); PhysicalityError if the form is not positive.
double gaussian_purity(double a, cplx g);

struct PurityOptions {
    double tolerance{1e-10};          // |I(h) - I(h/2)| acceptance
    std::size_t max_half_points{1024};
    bool force_quadrature{false};
};

double purity(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s,
              const PurityOptions& options = {});

// (1/pi) int d^2 eta |chi|^2 on a trapezoid grid, refined until two levels agree.
double purity_quadrature(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                         const OscillatorState& s, const PurityOptions& options = {});

Moments moments(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s);

// Variance of var_x over the number-state decomposition of the equilibrium bath:
// (hbar / m nu)^2 sum_k |B_k + D_k^*|^4 (nbar_k^2 + nbar_k).
double number_variance_of_variance(const PropagatorCoefficients& p, std::size_t i, double beta);

struct EnsembleEstimate {
    double estimate{0.0};
    double std_error{0.0};
    std::size_t n_samples{0};
    std::uint64_t seed{0};
};

// Sample mean and standard error; the reduction runs in index order.
EnsembleEstimate summarize(const std::vector<double>& values, std::uint64_t seed);

// Exact mean of the purity over the number-state decomposition of the equilibrium bath,
// from the geometric average of L_n(x)^2: e^{-2 nbar x} I_0(2 x sqrt(nbar (nbar + 1))).
// It exceeds the equilibrium purity at finite N and approaches it as the couplings thin out.
double averaged_purity_number_exact(const PropagatorCoefficients& p, std::size_t i, double beta,
                                    const OscillatorState& s, const PurityOptions& options = {});

EnsembleEstimate averaged_purity_number_ensemble(const PropagatorCoefficients& p, std::size_t i, double beta,
                                                 const OscillatorState& s, std::size_t n_samples,
                                                 std::uint64_t seed, unsigned threads = 1);

// Square grid of eta values on [-extent, extent]^2 with `points` nodes per side.
std::vector<cplx> eta_test_grid(double extent = 2.0, std::size_t points = 11);

// sup over the grid of |chi - exp(delta^* eta - delta eta^*) chi_vac|, chi_vac being the
// vacuum oscillator with a vacuum bath on the same propagator.
double displaced_vacuum_check(const PropagatorCoefficients& p, std::size_t i, const Eigen::VectorXcd& amps,
                              const OscillatorState& s, const std::vector<cplx>& eta_grid = eta_test_grid(3.0, 21));

}  // namespace qbath
